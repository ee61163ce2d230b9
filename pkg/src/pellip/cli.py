"""Command-line harness: ``pellip <command> [--config PATH] [options]``.

Every command writes its outputs plus ``run_record.json`` (config hash,
version, verdicts and sha256 manifest) and ``timing.json`` (wall time) into
the output directory.

Exit codes: 0 success, 1 numerical or I/O error, 2 schema error,
3 verdict failure, 4 inconclusive.
"""

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import (ROUNDING, analyticity_angle, as_field, delta_p_report,
                      joint_delta, p_ellipticity_range)
from .bellman import certify as cz
from .bellman.nazarov_treil import BellmanSpec
from .io import (COMMANDS, ConfigError, RunRecord, config_hash, field_on_domain,
                 normalize_config, parse_domain, parse_grid,
                 parse_matrix, sha256_file, write_csv, write_json)
from .semigroup import experiments as ex
from .semigroup.operator import assemble_operator
from .spectral import (DegenerateRay, ParabolaSpec, critical_angle,
                       parabola_point, tangency_check, touching_height, vertex)

log = logging.getLogger("pellip")


EXIT_OK, EXIT_ERROR, EXIT_SCHEMA, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4

_CERT_EXIT = {cz.CERTIFIED: EXIT_OK, cz.NEGATIVE: EXIT_FAIL,
              cz.INCONCLUSIVE: EXIT_INCONCLUSIVE}


class RunError(RuntimeError):
    """Numerical failure surfaced with the owning module's name."""


# --------------------------------------------------------------------------
# commands; each returns (verdicts, exit code) and writes into ``out``


def cmd_delta(inp, seed, out, threads):
    A = parse_matrix(inp["A"])
    p = float(inp["p"])
    rep = delta_p_report(A, p)
    res = rep.to_json()
    # values within rounding of zero are reported as the boundary case
    band = ROUNDING * max(1.0, as_field(A).bound())
    if rep.delta > band:
        verdict = "p-elliptic"
        if inp.get("angle", True):
            res["analyticity_angle"] = analyticity_angle(A, p)
    elif rep.delta < -band:
        verdict = "not p-elliptic"
    else:
        verdict = "boundary"
    res["verdict"] = verdict
    res["boundary_tolerance"] = band
    write_json(out / "delta.json", res)
    return {"delta": verdict}, EXIT_OK


def cmd_range(inp, seed, out, threads):
    A = as_field(parse_matrix(inp["A"]))
    lo, hi, bounded = p_ellipticity_range(A, float(inp.get("p_max", 1e6)))
    write_json(out / "range.json", {"p_minus": lo, "p_plus": hi, "bounded": bounded,
                                    "delta_2": joint_delta(2.0, A)})
    return {"range": "bounded" if bounded else "unbounded"}, EXIT_OK


def cmd_certify(inp, seed, out, threads):
    A, B = parse_matrix(inp["A"]), parse_matrix(inp["B"])
    p = float(inp["p"])
    n = int(inp.get("n_samples", 10_000))
    tol = float(inp.get("tol", 1e-9))
    target = inp["target"]
    if target == "power":
        cert = cz.certify_power(p, A, B, cz.sample_unit_sphere,
                                {"kind": "unit sphere"}, n, seed, tol=tol,
                                threads=threads)
        certs = {"power": cert}
    elif target == "pp":
        certs = {"pp": cz.certify_pp(p, A, B, n, seed, tol, threads)}
    elif target == "q":
        if "delta" in inp:
            delta = float(inp["delta"])
        else:
            delta, _ = cz.calibrate_delta(p, A, B, seed=seed, threads=threads)
        certs = {"q": cz.certify_q(BellmanSpec(p, delta), A, B, n, seed, tol,
                                   threads)}
    else:
        delta = float(inp.get("delta", 0.5))
        bell = BellmanSpec(p, delta)
        nu = float(inp.get("nu", 0.25))
        ns = tuple(inp.get("ns", [1, 2, 4]))
        if "c1" in inp:
            c1 = float(inp["c1"])
        else:
            cal = cz.calibrate_c1(bell, A, B, nu, ns, n, seed)
            write_json(out / "c1_calibration.json", cal)
            if cal["c1"] is None:
                return {"r": cz.INCONCLUSIVE}, EXIT_INCONCLUSIVE
            c1 = cal["c1"]
        rs = cz.certify_r(bell, A, B, nu, c1, ns, n, seed, tol=tol)
        certs = {f"r_n{k}": c for k, c in rs.items()}
    for name, cert in certs.items():
        write_json(out / f"certificate_{name}.json", cert.to_json())
    verdicts = {k: c.verdict for k, c in certs.items()}
    code = max(_CERT_EXIT[v] for v in verdicts.values())
    return verdicts, code


def _operators(inp):
    dom = parse_domain(inp["domain"])
    A = field_on_domain(inp["A"], dom)
    B = field_on_domain(inp["B"], dom) if "B" in inp else A
    return dom, assemble_operator(A, dom), assemble_operator(B, dom)


def cmd_flow(inp, seed, out, threads):
    dom, opA, opB = _operators(inp)
    p = float(inp["p"])
    if "delta" in inp:
        delta = float(inp["delta"])
    else:
        if opA.field.ncells > 1 or opB.field.ncells > 1:
            raise ConfigError("delta: required when the fields vary by cell")
        delta, _ = cz.calibrate_delta(p, opA.field.matrices[0],
                                      opB.field.matrices[0], seed=seed)
    times = parse_grid(inp["times"])
    rng = np.random.default_rng(seed)
    f = ex.smooth_data(opA, rng, 1)[:, 0]
    g = ex.smooth_data(opB, rng, 1)[:, 0]
    bell = BellmanSpec(p, delta)
    trace = ex.heat_flow_trace(bell, opA, opB, f, g, times,
                               float(inp.get("fd_rel", 1e-3)))
    trace.write_csv(out / "trace.csv", bell.p, bell.q)
    E = trace.energy
    ra, fd = trace.extra["rate_a"], trace.extra["rate_fd"]
    live = np.isfinite(fd)
    rel = float(np.max(np.abs(ra[live] - fd[live]) / np.maximum(np.abs(fd[live]),
                                                                1e-300))) \
        if live.any() else 0.0
    rise = float(np.max(np.diff(E))) if len(E) > 1 else 0.0
    monotone = rise <= 1e-12 * max(abs(E[0]), 1e-300)
    summary = {"domain": dom.to_json(), "bellman": bell.to_json(),
               "delta_p": joint_delta(p, opA.field, opB.field),
               "max_energy_increase": rise, "rate_fd_rel_error": rel,
               "min_pointwise_ratio": trace.extra["min_pointwise_ratio"],
               "strict_bound": trace.extra["strict_bound"],
               "tolerances": {"monotone_rel": 1e-12, "rate_rel": 1e-4}}
    write_json(out / "flow.json", summary)
    ok = monotone and rel <= 1e-4
    return {"flow": "monotone" if ok else "not monotone"}, EXIT_OK if ok else EXIT_FAIL


def cmd_bilinear(inp, seed, out, threads):
    dom, opA, opB = _operators(inp)
    p = float(inp["p"])
    n = int(inp.get("n_pairs", 10))
    rng = np.random.default_rng(seed)
    f = ex.smooth_data(opA, rng, n)
    g = ex.smooth_data(opB, rng, n)
    res = ex.bilinear_embedding(opA, opB, p, f, g,
                                per_decade=int(inp.get("per_decade", 40)))
    q = p / (p - 1.0)
    rows = [[k, res["integral"][k], opA.norm(f[:, k], p), opB.norm(g[:, k], q),
             res["ratio"][k]] for k in range(n)]
    write_csv(out / "bilinear.csv", ["pair", "integral", "norm_p", "norm_q", "ratio"],
              rows)
    finite = bool(np.all(np.isfinite(res["ratio"])))
    summary = {"domain": dom.to_json(), "p": p, "max_ratio": np.max(res["ratio"]),
               "mean_ratio": np.mean(res["ratio"]), "t0": res["t0"],
               "t_max": res["t_max"], "n_times": res["n_times"],
               "notes": res["notes"],
               "delta_p": joint_delta(p, opA.field, opB.field)}
    write_json(out / "bilinear.json", summary)
    return ({"bilinear": "finite" if finite else "infinite"},
            EXIT_OK if finite else EXIT_FAIL)


def cmd_contract(inp, seed, out, threads):
    dom, opA, _ = _operators(inp)
    p = float(inp["p"])
    rep = ex.contractivity(opA, p, times=parse_grid(inp.get("times")),
                           n_states=int(inp.get("n_states", 50)), seed=seed,
                           tol=float(inp.get("tol", 1e-6)),
                           search=bool(inp.get("search", True)))
    write_csv(out / "contract.csv", ["t", "max_ratio"],
              zip(rep["times"], rep["max_ratio_by_time"]))
    rep = {k: v for k, v in rep.items() if k not in ("times", "max_ratio_by_time")}
    rep["domain"] = dom.to_json()
    write_json(out / "contract.json", rep)
    code = {ex.PASS: EXIT_OK, ex.VIOLATION: EXIT_FAIL,
            ex.INCONCLUSIVE: EXIT_INCONCLUSIVE}[rep["verdict"]]
    return {"contract": rep["verdict"]}, code


def cmd_spectrum(inp, seed, out, threads):
    p, alpha = float(inp["p"]), float(inp.get("alpha", 1.0))
    spec = ParabolaSpec(p, alpha)
    ys = parse_grid(inp.get("y"), np.linspace(-4 * alpha ** 2, 4 * alpha ** 2, 201))
    star, phi = critical_angle(p)
    summary = {"p": p, "alpha": alpha, "phi_star": star, "phi": phi,
               "vertex": vertex(spec) if not spec.degenerate else alpha ** 2 / 4}
    z = parabola_point(spec, ys)
    if isinstance(z, DegenerateRay):
        # the ray {y = 0, x >= alpha^2/4}: only y = 0 lies on it
        rows = [[0.0, z.start, 0.0]] if np.any(ys == 0) else []
        summary["degenerate_ray"] = {"start": z.start}
    else:
        z = np.atleast_1d(z)
        rows = [[float(a.imag), float(a.real), float(np.angle(a))] for a in z]
        summary["touching_height"] = touching_height(spec)
        if inp.get("tangency", True):
            summary["tangency"] = tangency_check(p, alpha,
                                                 float(inp.get("y_max", 1e6)))
    write_csv(out / "spectrum.csv", ["y", "x", "arg"], rows)
    write_json(out / "spectrum.json", summary)
    return {"spectrum": "computed"}, EXIT_OK


def cmd_rigidity(inp, seed, out, threads):
    A = parse_matrix(inp["A"])
    prof = cz.profile_from_json(inp["profile"])
    cert = cz.rigidity_probe(A, prof, int(inp.get("n_samples", 100_000)), seed,
                             float(inp.get("r_max", 3.0)),
                             float(inp.get("tol", 1e-12)))
    write_json(out / "certificate.json", cert.to_json())
    return {"rigidity": cert.verdict}, _CERT_EXIT[cert.verdict]


HANDLERS = {"delta": cmd_delta, "range": cmd_range, "certify": cmd_certify,
            "flow": cmd_flow, "bilinear": cmd_bilinear, "contract": cmd_contract,
            "spectrum": cmd_spectrum, "rigidity": cmd_rigidity}

_MODULES = {"delta": "algebra", "range": "algebra", "certify": "bellman",
            "flow": "semigroup", "bilinear": "semigroup", "contract": "semigroup",
            "spectrum": "spectral", "rigidity": "bellman"}


def run_command(config, out=None, threads=1):
    """Validate, dispatch, write outputs and the run record.

    ``config`` is a raw or normalized config dict.  Raises ConfigError on
    schema violations and RunError on numerical failures.
    """
    cfg = normalize_config(config)
    out = Path(out or cfg.get("outputPath") or f"pellip-{cfg['command']}")
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    try:
        verdicts, code = HANDLERS[cfg["command"]](cfg["inputs"], cfg["seed"],
                                                  out, threads)
    except ConfigError:
        raise
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        raise RunError(f"{_MODULES[cfg['command']]}: {exc}") from exc
    wall = time.perf_counter() - start
    skip = {"run_record.json", "timing.json"}
    manifest = {p.name: sha256_file(p) for p in sorted(out.iterdir())
                if p.is_file() and p.name not in skip}
    rec = RunRecord(config_hash(cfg), __version__, cfg["command"], cfg["seed"],
                    verdicts, code, manifest, wall)
    write_json(out / "run_record.json", rec.to_json())
    write_json(out / "timing.json", {"wall_time_s": wall})
    return rec


def _threads(arg):
    if arg is not None:
        return arg
    env = os.environ.get("PELLIP_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser():
    ap = argparse.ArgumentParser(prog="pellip", description=__doc__.splitlines()[0])
    ap.add_argument("command", nargs="?",
                    help="one of: " + ", ".join(COMMANDS)
                    + " (optional when the config names it)")
    ap.add_argument("--config", type=Path, help="JSON config file")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--out", type=Path, help="output directory")
    ap.add_argument("--threads", type=int,
                    help="worker threads for sampling (default $PELLIP_THREADS or 1)")
    ap.add_argument("--verbose", action="store_true")
    ap.add_argument("--version", action="version", version=__version__)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        if args.config is not None:
            with open(args.config) as fh:
                cfg = json.load(fh)
        else:
            cfg = {}
        if not isinstance(cfg, dict):
            raise ConfigError("<root>: config must be a JSON object")
        if args.command is not None:
            if cfg.get("command", args.command) != args.command:
                raise ConfigError(f"command: {args.command!r} conflicts with "
                                  f"config command {cfg['command']!r}")
            cfg["command"] = args.command
        cfg = normalize_config(cfg, args.seed)
        log.info("running %s with seed %d", cfg["command"], cfg["seed"])
        rec = run_command(cfg, args.out, _threads(args.threads))
    except json.JSONDecodeError as exc:
        print(f"schema error: <root>: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_SCHEMA
    except ConfigError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except RunError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for k, v in rec.verdicts.items():
        print(f"{k}: {v}")
    log.info("wall time %.2f s", rec.wall_time)
    return rec.exit_code


if __name__ == "__main__":
    sys.exit(main())
