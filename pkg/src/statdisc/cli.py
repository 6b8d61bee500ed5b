"""Command-line front end.

Subcommands map one-to-one onto the library operations; every numeric
output goes through a canonical JSON or CSV emitter (floats at 17
significant digits, complex numbers as [re, im] pairs) so identical
configurations produce byte-identical output.  Exit codes: 0 success,
1 domain error (details as JSON on stderr), 2 usage error.
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import boundary_analysis
from .boundary_analysis import circle_nodes, default_grid
from .disc import (
    DiscParams,
    LiftParams,
    closed_form_lift,
    disc_through,
    invert_disc,
    make_disc,
    projectivize_lift,
    verify_gluing,
)
from .errors import StatdiscError, UsageError
from .indices import build_B, maslov_index, partial_indices, verify_reduction_chain
from .quadric import Hyperquadric, PerturbedHypersurface
from .rh_solver import (
    SolveConfig,
    center_map_jacobians,
    family_dimension,
    indicatrix_sample,
    solve_with_homotopy,
    transport_jet,
)

SUBCOMMANDS = (
    "disc-make",
    "disc-invert",
    "disc-through",
    "lift",
    "verify",
    "indices-maslov",
    "indices-partial",
    "indices-replay",
    "solve",
    "family-dim",
    "jacobians",
    "indicatrix",
    "transport",
)


# ---------------------------------------------------------------------------
# canonical output
# ---------------------------------------------------------------------------


def _fmt_float(x):
    x = float(x)
    if x != x or x in (float("inf"), float("-inf")):
        raise StatdiscError("non-finite value in output")
    return format(x, ".17g")


def canonical_json(obj):
    """Deterministic JSON with fixed float formatting and sorted keys."""
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return canonical_json(pair(obj))
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def pair(z):
    z = complex(z)
    return [float(z.real), float(z.imag)]


def vector_pairs(v):
    return [pair(z) for z in np.asarray(v, dtype=complex)]


def samples_csv(header_fields, rows, schema):
    lines = [f"# schema={schema}", ",".join(header_fields)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            else:
                cells.append(_fmt_float(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def boundary_csv(samples):
    """CSV for (n+1, N) boundary samples: k, theta, per-component re/im."""
    ncomp, N = samples.shape
    theta = 2.0 * np.pi * np.arange(N) / N
    fields = ["k", "theta"]
    for j in range(ncomp):
        fields += [f"component_{j}_re", f"component_{j}_im"]
    rows = []
    for k in range(N):
        row = [k, theta[k]]
        for j in range(ncomp):
            row += [samples[j, k].real, samples[j, k].imag]
        rows.append(row)
    return samples_csv(fields, rows, "boundary-samples/1")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class RunConfig:
    subcommand: str
    options: dict = field(default_factory=dict)


def _parse_complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"cannot parse complex number {text!r}")


def _parse_point(text):
    return np.array([_parse_complex(t) for t in text.split(",")], dtype=complex)


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="statdisc",
        description="Stationary discs on hyperquadrics: construction, lifts, "
        "boundary-symbol indices, and Newton continuation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with option defaults")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    common.add_argument("--grid", type=int, help="circle grid size override")
    common.add_argument("--modes", type=int, help="Fourier truncation for solves")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", help="write the artifact to a path instead of stdout")
    sub = ap.add_subparsers(dest="subcommand")

    def add(name, **kw):
        p = sub.add_parser(name, parents=[common], **kw)
        p.add_argument("--n", type=int, default=1)
        p.add_argument("--A", help="JSON file with the model {n, A} (or full input)")
        p.add_argument("--a", default="0", help="pole parameter, complex literal")
        p.add_argument("--w", default="1", help="comma-separated complex vector")
        p.add_argument("--v", help="comma-separated complex vector (default 0)")
        p.add_argument("--y0", type=float, default=0.0)
        p.add_argument("--b", type=float, default=1.0)
        p.add_argument("--p0", default="1", help="center first coordinate")
        p.add_argument("--z", help="comma-separated target point")
        p.add_argument("--epsilon", type=float, default=0.0)
        p.add_argument("--term", action="append", default=[],
                       help="perturbation monomial as 'i0,i1,...:coeff'")
        p.add_argument("--input", help="input file (JSON or CSV, per subcommand)")
        p.add_argument("--count", type=int, default=16)
        p.add_argument("--pin-center", action="store_true")
        p.add_argument("--source", default="closed_form",
                       choices=("closed_form", "gradient"))
        p.add_argument("--theta", type=float, default=0.0,
                       help="rotation angle for the transport differential")
        return p

    for name in SUBCOMMANDS:
        add(name)
    return ap


def parse_config(argv):
    """argv -> RunConfig; flags override config-file values."""
    ap = _build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        raise UsageError(f"bad command line (argparse exit {exc.code})")
    if ns.subcommand is None:
        raise UsageError("a subcommand is required")
    options = vars(ns).copy()
    cfg_path = options.pop("config", None)
    if cfg_path:
        try:
            with open(cfg_path) as fh:
                defaults = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}")
        if not isinstance(defaults, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(defaults) - set(options)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        # command line wins: only fill values the user left at defaults
        sentinel = vars(ap.parse_args([ns.subcommand]))
        for k, v in defaults.items():
            if k in options and options[k] == sentinel.get(k):
                options[k] = v
    sub = options.pop("subcommand")
    return RunConfig(subcommand=sub, options=options)


# ---------------------------------------------------------------------------
# model assembly
# ---------------------------------------------------------------------------


def _load_model(opt):
    if opt.get("A"):
        path = opt["A"]
        try:
            with open(path) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read model file: {exc}")
        if "terms" in obj or "epsilon" in obj:
            return PerturbedHypersurface.from_json(obj)
        return PerturbedHypersurface(base=Hyperquadric.from_json(obj))
    n = int(opt["n"])
    terms = {}
    for spec in opt.get("term", []):
        try:
            mi, coeff = spec.split(":")
            key = tuple(int(s) for s in mi.split(","))
            terms[key] = float(coeff)
        except ValueError:
            raise UsageError(f"bad --term {spec!r}")
    return PerturbedHypersurface(
        base=Hyperquadric(n=n, A=np.eye(n, dtype=complex)),
        epsilon=float(opt.get("epsilon") or 0.0),
        terms=terms,
    )


def _disc_params(opt, n):
    w = _parse_point(opt["w"])
    if w.size != n:
        raise UsageError(f"--w must have {n} components")
    v = _parse_point(opt["v"]) if opt.get("v") else np.zeros(n, dtype=complex)
    return DiscParams(y0=float(opt["y0"]), v=v, w=w, a=_parse_complex(opt["a"]))


def _grid(opt):
    return boundary_analysis.validate_grid(opt["grid"]) if opt.get("grid") else default_grid()


def _solve_config(opt):
    kw = {}
    if opt.get("grid"):
        kw["N"] = int(opt["grid"])
    if opt.get("modes"):
        kw["M"] = int(opt["modes"])
    return SolveConfig(**kw)


# ---------------------------------------------------------------------------
# subcommand bodies
# ---------------------------------------------------------------------------


def _run(cfg):
    opt = cfg.options
    m = _load_model(opt)
    q = m.base
    N = _grid(opt)

    if cfg.subcommand == "disc-make":
        params = _disc_params(opt, q.n)
        d = make_disc(q, params)
        if opt["format"] == "csv":
            return boundary_csv(d.boundary(N))
        rep = verify_gluing(m if m.epsilon else q, d.boundary(N))
        return canonical_json(
            {
                "params": params.to_json(),
                "center": vector_pairs(d.center()),
                "endpoint": vector_pairs(d.at(np.array(1.0 + 0.0j))),
                "velocity": vector_pairs(d.velocity()),
                "max_residual": rep.max_residual,
            }
        ) + "\n"

    if cfg.subcommand == "disc-invert":
        if not opt.get("input"):
            raise UsageError("disc-invert needs --input CSV of boundary samples")
        samples = _read_boundary_csv(opt["input"], q.n + 1)
        params = invert_disc(q, samples)
        return canonical_json({"params": params.to_json()}) + "\n"

    if cfg.subcommand == "disc-through":
        if not opt.get("z"):
            raise UsageError("disc-through needs --z")
        z = _parse_point(opt["z"])
        params = disc_through(q, _parse_complex(opt["p0"]), z)
        d = make_disc(q, params)
        return canonical_json(
            {
                "a": pair(params.a),
                "w": vector_pairs(params.w),
                "y0": params.y0,
                "endpoint": vector_pairs(d.at(np.array(1.0 + 0.0j))),
            }
        ) + "\n"

    if cfg.subcommand == "lift":
        params = _disc_params(opt, q.n)
        lift = closed_form_lift(q, LiftParams(disc=params, b=float(opt["b"])))
        if opt["format"] == "csv":
            return boundary_csv(lift.boundary(N))
        proj = projectivize_lift(q, LiftParams(disc=params, b=float(opt["b"])), N=N)
        zeta = circle_nodes(N)
        from .boundary_analysis import BoundaryFunction, holomorphic_defect

        hs = lift.boundary(N)
        defect = float(
            np.max(holomorphic_defect(BoundaryFunction(zeta[None, :] * hs)))
        )
        return canonical_json(
            {
                "b": float(opt["b"]),
                "lift_defect": defect,
                "c_at_1": float(lift.c_factor(np.array(1.0 + 0.0j)).real),
                "projectivized_components": 2 * q.n + 1,
                "permutation": list(proj.permutation) if proj.permutation else None,
            }
        ) + "\n"

    if cfg.subcommand == "verify":
        if not opt.get("input"):
            raise UsageError("verify needs --input CSV of boundary samples")
        samples = _read_boundary_csv(opt["input"], q.n + 1)
        rep = verify_gluing(m, samples)
        return canonical_json(
            {"max_residual": rep.max_residual, "lift_defect": rep.lift_defect}
        ) + "\n"

    if cfg.subcommand == "indices-maslov":
        params = _disc_params(opt, q.n)
        B = build_B(q, params, source=opt["source"], N=N)
        kappa = maslov_index(B)
        return canonical_json({"kappa_total": kappa, "n": q.n, "expected": 2 * q.n + 2}) + "\n"

    if cfg.subcommand == "indices-partial":
        params = _disc_params(opt, q.n)
        B = build_B(q, params, source=opt["source"], N=N)
        pi = partial_indices(B)
        out = pi.to_json()
        out["det_winding"] = maslov_index(B)
        return canonical_json(out) + "\n"

    if cfg.subcommand == "indices-replay":
        params = _disc_params(opt, q.n)
        rep = verify_reduction_chain(q, params, N=N)
        return canonical_json(rep.to_json()) + "\n"

    if cfg.subcommand == "solve":
        params = _disc_params(opt, q.n)
        scfg = _solve_config(opt)
        pin = None
        if opt.get("pin_center"):
            pin = np.zeros(q.n + 1, dtype=complex)
            pin[0] = _parse_complex(opt["p0"])
        sol = solve_with_homotopy(m, params, scfg, pin_center=pin)
        return canonical_json(sol.to_json()) + "\n"

    if cfg.subcommand == "family-dim":
        params = _disc_params(opt, q.n)
        scfg = _solve_config(opt)
        pin = None
        if opt.get("pin_center"):
            pin = np.zeros(q.n + 1, dtype=complex)
            pin[0] = _parse_complex(opt["p0"])
        sol = solve_with_homotopy(m, params, scfg, pin_center=pin)
        fd = family_dimension(m, sol, scfg)
        return canonical_json(
            {
                "dim": fd["dim"],
                "pinned": bool(opt.get("pin_center")),
                "singular_values": [float(v) for v in fd["singular_values"][-12:]],
            }
        ) + "\n"

    if cfg.subcommand == "jacobians":
        scfg = _solve_config(opt)
        cm = center_map_jacobians(m, _parse_complex(opt["p0"]), scfg)
        return canonical_json(
            {
                "endpoint_invertible": cm.endpoint_invertible,
                "velocity_injective": cm.velocity_injective,
                "sv_endpoint_min": float(cm.sv_endpoint[-1]),
                "sv_velocity_min": float(cm.sv_velocity[-1]),
            }
        ) + "\n"

    if cfg.subcommand == "indicatrix":
        scfg = _solve_config(opt)
        pts = indicatrix_sample(
            m, _parse_complex(opt["p0"]), int(opt["count"]), scfg, seed=int(opt["seed"])
        )
        fields = ["index", "ok", "y0", "a_re", "a_im"]
        nn = q.n
        for j in range(nn):
            fields += [f"w{j}_re", f"w{j}_im"]
        for j in range(nn + 1):
            fields += [f"velocity{j}_re", f"velocity{j}_im"]
        fields.append("residual")
        rows = []
        for i, pt in enumerate(pts):
            ok = int(pt.velocity is not None)
            par = pt.params
            row = [i, ok]
            row += [par.y0, par.a.real, par.a.imag] if par else [0.0, 0.0, 0.0]
            for j in range(nn):
                row += [par.w[j].real, par.w[j].imag] if par else [0.0, 0.0]
            for j in range(nn + 1):
                row += (
                    [pt.velocity[j].real, pt.velocity[j].imag]
                    if pt.velocity is not None
                    else [0.0, 0.0]
                )
            row.append(0.0 if not np.isfinite(pt.residual) else pt.residual)
            rows.append(row)
        return samples_csv(fields, rows, "indicatrix-cloud/1")

    if cfg.subcommand == "transport":
        if not opt.get("z"):
            raise UsageError("transport needs --z")
        scfg = _solve_config(opt)
        z = _parse_point(opt["z"])
        th = float(opt["theta"])
        dF = np.eye(q.n + 1, dtype=complex)
        dF[1:, 1:] *= np.exp(1j * th)
        out = transport_jet(m, m, _parse_complex(opt["p0"]), dF, z, cfg=scfg)
        return canonical_json({"image": vector_pairs(out), "theta": th}) + "\n"

    raise UsageError(f"unknown subcommand {cfg.subcommand!r}")


def _read_boundary_csv(path, ncomp):
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise UsageError(f"cannot read samples: {exc}")
    data = [ln for ln in lines if not ln.startswith("#")]
    header = data[0].split(",")
    body = [ln.split(",") for ln in data[1:]]
    try:
        arr = np.array([[float(c) for c in row] for row in body])
    except ValueError:
        raise UsageError("malformed boundary CSV")
    if arr.shape[1] != 2 + 2 * ncomp:
        raise UsageError(f"expected {2 + 2 * ncomp} columns, got {arr.shape[1]}")
    samples = np.empty((ncomp, arr.shape[0]), dtype=complex)
    for j in range(ncomp):
        samples[j] = arr[:, 2 + 2 * j] + 1j * arr[:, 3 + 2 * j]
    return samples


def execute(cfg):
    """Run a parsed configuration; returns the process exit code."""
    try:
        artifact = _run(cfg)
    except UsageError as exc:
        sys.stderr.write(canonical_json({"error": "usage", "detail": str(exc)}) + "\n")
        return 2
    except StatdiscError as exc:
        sys.stderr.write(
            canonical_json({"error": type(exc).__name__, "detail": str(exc)}) + "\n"
        )
        return 1
    out_path = cfg.options.get("output")
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(artifact)
    else:
        sys.stdout.write(artifact)
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        sys.stderr.write(canonical_json({"error": "usage", "detail": str(exc)}) + "\n")
        return 2
    return execute(cfg)


if __name__ == "__main__":
    sys.exit(main())
