"""Command-line front end.

    greenvar green   --config run.json --out results/
    greenvar sweep   --config run.json --out results/
    greenvar grow    --config run.json --out results/
    greenvar inverse --config run.json --out results/
    greenvar oracle  --config run.json --out results/

The config is a JSON document; every key is optional. Example::

    {
      "domain": {"type": "disk"},            # or a path to a domain JSON file
      "w": [0.0, 0.0], "zeta": [1.0, 0.0],
      "operator": {"kind": "schrodinger", "u": "const(1)"},
      "eps": [0.2, 0.1, 0.05, 0.025],
      "resolution": {"n_radial": 48, "n_angular": 96, "n_boundary": 64, "grid": 40},
      "growth": {"dt": 0.001, "t_end": 1.0, "snapshot_every": 50, "nodes": 256},
      "inverse": {"alphas": [1e-4, 1e-6, 1e-8], "u_true": "re(1)"},
      "oracle": {"eps": 0.1, "n_r": 128, "n_theta": 128}
    }

Exit codes: 0 success, 2 usage/config error, 3 numerical failure, 1 I/O failure.
Every run writes ``manifest.json`` with the config echo, library version,
timings and SHA-256 checksums of the outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .beltrami import beltrami_sweep
from .errors import DomainError, DomainSpecError, GreenvarError, InputError
from .geometry import MarkerCurve, UnitDisk, domain_from_dict, load_domain
from .green import make_kernel
from .growth import GrowthState, OperatorSpec, resample_equal_arclength, run
from .inverse import assemble, export_csv, residual_curve, solve_tikhonov, spectrum
from .oracle import PolarGrid, bessel_flux, fd_green
from .potentials import make_potential
from .quadrature import area_rule
from .schrodinger import epsilon_limit, epsilon_sweep, normal_derivative_exact, solve_series
from .svg import curves_svg, field_svg, loglog_svg

COMMANDS = ("green", "sweep", "grow", "inverse", "oracle")


class UsageError(Exception):
    pass


def _point(value, name, default):
    if value is None:
        return complex(default)
    try:
        if isinstance(value, (int, float)):
            return complex(value)
        x, y = value
        return complex(float(x), float(y))
    except (TypeError, ValueError):
        raise UsageError(f"{name}: expected [x, y]") from None


class RunConfig:
    """Validated view of the JSON config."""

    def __init__(self, command, doc, out, resolution=None, seed=0):
        if not isinstance(doc, dict):
            raise UsageError("config: expected a JSON object")
        self.command = command
        self.doc = doc
        self.out = Path(out)
        self.seed = int(seed)
        dom = doc.get("domain", {"type": "disk"})
        try:
            self.domain = load_domain(dom) if isinstance(dom, str) else domain_from_dict(dom)
        except DomainSpecError as exc:
            raise UsageError(f"domain.{exc}") from None
        except FileNotFoundError as exc:
            raise UsageError(f"domain: cannot read {exc.filename}") from None
        self.w = _point(doc.get("w"), "w", 0)
        if not self.domain.contains(self.w):
            raise UsageError("w: source point must lie inside the domain")
        res = dict(doc.get("resolution", {}))
        if resolution is not None:
            if resolution < 8:
                raise UsageError("--resolution must be >= 8")
            res.setdefault("n_angular", 2 * (resolution // 2))
            res.setdefault("n_radial", max(8, resolution // 2))
            res.setdefault("grid", resolution)
        self.n_radial = int(res.get("n_radial", 48))
        self.n_angular = int(res.get("n_angular", 96))
        # the discrete A has rank <= n_angular, so more boundary nodes add no information
        self.n_boundary = int(res.get("n_boundary", min(64, self.n_angular)))
        self.grid = int(res.get("grid", 40))
        if min(self.n_radial, self.n_angular) < 8 or self.n_boundary < 16 or self.grid < 4:
            raise UsageError("resolution: n_radial, n_angular >= 8, n_boundary >= 16, grid >= 4")
        op = dict(doc.get("operator", {}))
        self.kind = op.get("kind", "schrodinger" if command == "sweep" else "laplace")
        if self.kind not in ("laplace", "schrodinger", "beltrami"):
            raise UsageError(f"operator.kind: unknown operator {self.kind!r}")
        try:
            self.u = make_potential(op.get("u", "const(1)"))
        except InputError as exc:
            raise UsageError(f"operator.u: {exc}") from None
        self.op_eps = float(op.get("eps", 0.0))
        self.eps = [float(e) for e in doc.get("eps", [0.2, 0.1, 0.05, 0.025])]
        self.resolution = (self.n_radial, self.n_angular)

    @property
    def zeta(self):
        default = self.domain.boundary_samples(16).z[0]
        zeta = _point(self.doc.get("zeta"), "zeta", default)
        if "zeta" in self.doc:
            try:
                make_kernel(self.domain).boundary_frame(np.array([zeta]))
            except DomainError:
                raise UsageError(f"zeta: {zeta} is not on the domain boundary") from None
        return zeta

    def eps_limit(self):
        rule = area_rule(self.domain, self.n_radial, self.n_angular, self.w)
        return epsilon_limit(self.u(rule.nodes))


def _sha(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _write_csv(path, header, rows):
    export_csv(path, rows, header)


def _grid_points(domain, n, w):
    if isinstance(domain, UnitDisk):
        xmin = ymin = -1.0
        xmax = ymax = 1.0
    else:
        b = domain.boundary_samples(256).z
        xmin, xmax, ymin, ymax = b.real.min(), b.real.max(), b.imag.min(), b.imag.max()
    X, Y = np.meshgrid(np.linspace(xmin, xmax, n + 1), np.linspace(ymin, ymax, n + 1))
    z = (X + 1j * Y).ravel()
    z = z[domain.contains(z)]
    return z[z != w]


def cmd_green(cfg: RunConfig):
    kernel = make_kernel(cfg.domain)
    z = _grid_points(cfg.domain, cfg.grid, cfg.w)
    g = np.asarray(kernel.green(z, cfg.w))
    P = np.asarray(kernel.poisson(z, cfg.zeta))
    out = {}
    out["green.csv"] = cfg.out / "green.csv"
    _write_csv(out["green.csv"], "x,y,value", np.column_stack([z.real, z.imag, g]))
    out["poisson.csv"] = cfg.out / "poisson.csv"
    _write_csv(out["poisson.csv"], "x,y,value", np.column_stack([z.real, z.imag, P]))
    bnd = cfg.domain.boundary_samples(256).z
    cell = (z.real.max() - z.real.min()) / cfg.grid
    out["green.svg"] = cfg.out / "green.svg"
    field_svg(out["green.svg"], z, g, "g(z, w)", boundary=bnd, cell=cell)
    out["poisson.svg"] = cfg.out / "poisson.svg"
    field_svg(out["poisson.svg"], z, P, "P(z, zeta)", boundary=bnd, cell=cell)
    return out, {}


def cmd_sweep(cfg: RunConfig):
    if not cfg.eps:
        raise UsageError("eps: the sweep needs a non-empty epsilon list")
    if len(cfg.eps) < 4:
        raise UsageError("eps: the sweep needs at least 4 values")
    limit = cfg.eps_limit()
    if max(cfg.eps) >= limit or min(cfg.eps) <= 0:
        raise UsageError(f"eps: values must lie in (0, {limit:.6g}) for this u")
    if cfg.kind == "beltrami":
        rep = beltrami_sweep(cfg.domain, cfg.u, cfg.w, cfg.zeta, cfg.eps, cfg.resolution)
        second, order_q = float("nan"), float("nan")
        linear = rep.base + rep.eps * rep.first
        quad = np.full(len(rep.eps), np.nan)
        rem_q = np.full(len(rep.eps), np.nan)
    else:
        rep = epsilon_sweep(cfg.domain, cfg.u, cfg.w, cfg.zeta, cfg.eps, resolution=cfg.resolution)
        second, order_q = rep.second, rep.order_quadratic
        linear, quad, rem_q = rep.linear_model, rep.quadratic_model, rep.remainder_quadratic
    n = len(rep.eps)
    rows = np.column_stack([rep.eps, rep.exact, linear, quad, rep.remainder_linear, rem_q,
                            np.full(n, rep.base), np.full(n, rep.first), np.full(n, second)])
    out = {"sweep.csv": cfg.out / "sweep.csv"}
    _write_csv(out["sweep.csv"], "eps,exact,linear_model,quadratic_model,remainder_linear,"
               "remainder_quadratic,base,first_variation,second_variation", rows)
    report = {"operator": cfg.kind, "u": cfg.u.spec(), "w": [cfg.w.real, cfg.w.imag],
              "zeta": [cfg.zeta.real, cfg.zeta.imag], "base": rep.base, "first_variation": rep.first,
              "second_variation": None if np.isnan(second) else second,
              "order_linear": rep.order_linear,
              "order_quadratic": None if np.isnan(order_q) else order_q}
    out["report.json"] = cfg.out / "report.json"
    out["report.json"].write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    series = {"after linear": (rep.eps, rep.remainder_linear)}
    if not np.isnan(order_q):
        series["after quadratic"] = (rep.eps, rem_q)
    out["sweep.svg"] = cfg.out / "sweep.svg"
    loglog_svg(out["sweep.svg"], series, f"remainder orders ({cfg.kind}, u={cfg.u.spec()})")
    return out, report


def cmd_grow(cfg: RunConfig):
    gdoc = dict(cfg.doc.get("growth", {}))
    dt = float(gdoc.get("dt", 1e-3))
    t_end = float(gdoc.get("t_end", 1.0))
    stride = int(gdoc.get("snapshot_every", 50))
    nodes = int(gdoc.get("nodes", 256))
    if dt <= 0:
        raise UsageError("growth.dt: must be positive")
    if t_end < 0:
        raise UsageError("growth.t_end: must be nonnegative")
    if stride < 1:
        raise UsageError("growth.snapshot_every: must be >= 1")
    if nodes < 16 or nodes % 2:
        raise UsageError("growth.nodes: must be even and >= 16")
    dom = cfg.domain
    if not isinstance(dom, MarkerCurve):
        dom = MarkerCurve(resample_equal_arclength(dom.boundary_samples(nodes).z, nodes))
    op = OperatorSpec(cfg.kind, cfg.u if cfg.kind != "laplace" else None,
                      cfg.op_eps, int(gdoc.get("n_radial", 16)))
    out = {"trajectory.jsonl": cfg.out / "trajectory.jsonl"}
    traj = run(GrowthState.initial(dom, cfg.w, op), dt=dt, t_end=t_end, snapshot_every=stride,
               path=out["trajectory.jsonl"])
    rows = np.array([(s.t, s.area, s.perimeter, np.sqrt(s.area / np.pi), len(s.domain)) for s in traj])
    out["summary.csv"] = cfg.out / "summary.csv"
    _write_csv(out["summary.csv"], "t,area,perimeter,radius,nodes", rows)
    out["growth.svg"] = cfg.out / "growth.svg"
    curves_svg(out["growth.svg"], [s.domain.points for s in traj], f"{cfg.kind} growth snapshots")
    final = traj[-1]
    return out, {"t_final": final.t, "area_final": final.area, "radius_final": float(np.sqrt(final.area / np.pi)),
                 "snapshots": len(traj)}


def cmd_inverse(cfg: RunConfig):
    idoc = dict(cfg.doc.get("inverse", {}))
    alphas = [float(a) for a in idoc.get("alphas", [1e-4, 1e-6, 1e-8])]
    if not alphas:
        raise UsageError("inverse.alphas: needs at least one value")
    if min(alphas) <= 0:
        raise UsageError("inverse.alphas: values must be positive")
    opA = assemble(cfg.domain, cfg.w, cfg.n_radial, cfg.n_angular, cfg.n_boundary)
    target = idoc.get("target", "roundtrip")
    if target == "roundtrip":
        u_true = make_potential(idoc.get("u_true", "re(1)"))
        v = opA.apply(u_true)
    elif target == "smooth":
        amp = float(idoc.get("amplitude", 0.3))
        v = -(1.0 + amp * np.cos(np.angle(opA.boundary.z - cfg.w))) * abs(opA.apply(lambda z: np.ones(z.shape)).mean())
    else:
        raise UsageError(f"inverse.target: unknown target {target!r}")
    noise = float(idoc.get("noise", 0.0))
    if noise:
        rng = np.random.default_rng(cfg.seed)
        v = v + noise * np.abs(v).max() * rng.standard_normal(len(v))
    rep = spectrum(opA)
    out = {"spectrum.csv": cfg.out / "spectrum.csv"}
    _write_csv(out["spectrum.csv"], "index,singular_value", rep.to_rows())
    curve = residual_curve(opA, v, sorted(alphas, reverse=True))
    out["residuals.csv"] = cfg.out / "residuals.csv"
    _write_csv(out["residuals.csv"], "alpha,residual_l2,residual_l1,u_norm", curve)
    best = solve_tikhonov(opA, v, min(alphas))
    z = opA.rule.nodes
    out["recovered_u.csv"] = cfg.out / "recovered_u.csv"
    _write_csv(out["recovered_u.csv"], "x,y,u,u_nonneg", np.column_stack([z.real, z.imag, best.u, best.u_nonneg]))
    out["recovered_u.svg"] = cfg.out / "recovered_u.svg"
    field_svg(out["recovered_u.svg"], z, best.u, f"recovered u (alpha={min(alphas):g})",
              boundary=opA.boundary.z, cell=2.0 / np.sqrt(len(z)))
    summary = {"smallest_singular_value": float(rep.singular_values[-1]), "rank": rep.rank,
               "condition": rep.condition, "degenerate": rep.degenerate,
               "residual": best.residual, "residual_l1": best.residual_l1,
               "residual_nonneg": best.residual_nonneg, "alpha": min(alphas)}
    out["inverse.json"] = cfg.out / "inverse.json"
    out["inverse.json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return out, summary


def cmd_oracle(cfg: RunConfig):
    if not isinstance(cfg.domain, UnitDisk):
        raise UsageError("domain: the oracle runs on the unit disk only")
    odoc = dict(cfg.doc.get("oracle", {}))
    eps = float(odoc.get("eps", 0.1))
    grid = PolarGrid(int(odoc.get("n_r", 128)), int(odoc.get("n_theta", 128)))
    if eps < 0 or eps >= cfg.eps_limit():
        raise UsageError("oracle.eps: outside the admissible range for u")
    sg = solve_series(cfg.domain, cfg.u, eps, cfg.w, resolution=cfg.resolution)
    fd = fd_green(grid, lambda z: eps * cfg.u(z), cfg.w)
    rng = np.random.default_rng(cfg.seed)
    rad = np.sqrt(rng.uniform(0.01, 0.8, 10))
    probes = rad * np.exp(1j * rng.uniform(0, 2 * np.pi, 10))
    probes = probes[np.abs(probes - cfg.w) > 0.05]
    main, ref = np.asarray(sg.evaluate(probes)), fd.interpolate(probes)
    rows = [np.column_stack([probes.real, probes.imag, main, ref, np.abs(main / ref - 1)])]
    zeta = np.exp(1j * grid.theta)
    flux_main = normal_derivative_exact(sg, zeta)
    out = {"probes.csv": cfg.out / "probes.csv", "flux.csv": cfg.out / "flux.csv"}
    _write_csv(out["probes.csv"], "x,y,series,fd,rel_err", rows[0])
    frows = np.column_stack([grid.theta, flux_main, fd.flux, np.abs(flux_main / fd.flux - 1)])
    _write_csv(out["flux.csv"], "theta,series,fd,rel_err", frows)
    summary = {"max_probe_rel_err": float(rows[0][:, 4].max()), "max_flux_rel_err": float(frows[:, 3].max())}
    if cfg.u.name == "const" and cfg.w == 0:
        summary["bessel_flux"] = bessel_flux(eps * cfg.u.params["c"])
        summary["series_flux_rel_err"] = float(abs(flux_main.mean() / summary["bessel_flux"] - 1))
    out["oracle.json"] = cfg.out / "oracle.json"
    out["oracle.json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return out, summary


HANDLERS = {"green": cmd_green, "sweep": cmd_sweep, "grow": cmd_grow, "inverse": cmd_inverse,
            "oracle": cmd_oracle}


def build_parser():
    p = argparse.ArgumentParser(prog="greenvar", description="Green functions and their variations")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", default="greenvar-out", help="output directory (created if absent)")
    p.add_argument("--resolution", type=int, help="angular resolution (radial = half, grid = same)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"config: {path} is not valid JSON ({exc})") from None
    except OSError as exc:
        raise UsageError(f"config: cannot read {path} ({exc.strerror})") from None


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        doc = _load_config(args.config)
        cfg = RunConfig(args.command, doc, args.out, args.resolution, args.seed)
        cfg.out.mkdir(parents=True, exist_ok=True)
        t1 = time.perf_counter()
        outputs, summary = HANDLERS[args.command](cfg)
        t2 = time.perf_counter()
        manifest = {"command": args.command, "config": doc, "seed": args.seed,
                    "resolution": args.resolution, "version": __version__,
                    "timings": {"setup_s": t1 - t0, "run_s": t2 - t1},
                    "summary": summary,
                    "outputs": {name: _sha(path) for name, path in sorted(outputs.items())}}
        (cfg.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    except UsageError as exc:
        print(f"greenvar {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except GreenvarError as exc:
        print(f"greenvar {args.command}: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        where = exc.filename or args.out
        print(f"greenvar {args.command}: I/O error at {where}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    print(f"greenvar {args.command}: wrote {len(outputs)} files to {os.fspath(cfg.out)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
