"""Command-line front end: ``ruledgeom <subcommand> --scenario S --out DIR``.

Exit codes: 0 success, 1 invalid scenario or arguments, 2 geometric
failure, 3 verification failure.
"""

import argparse
import dataclasses
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import GeometryError, RankDeficientPlane, ScenarioError
from .io import grid_mesh, write_csv, write_obj
from .parallel import map_chunks, resolve_threads
from .reconstruction import RECON_HEADER, prescription_from_table, reconstruct
from .ruled_surface import SurfaceJet, arc_length_spec, curvature_grid, ruling_sweep
from .sannia import read_invariants_csv, sannia_frame_at, sannia_invariants, write_invariants_csv
from .scenario import build_spec, bundled_names, load_scenario, with_step
from .striction import (StrictionResult, assemble_branches, find_striction_numeric,
                        spaceform_striction_v)

log = logging.getLogger("ruledgeom")

EXIT_OK, EXIT_INVALID, EXIT_GEOMETRY, EXIT_VERIFY = 0, 1, 2, 3

CURVATURE_HEADER = ["i", "j", "u", "v", "x", "y", "z", "K_ambient", "K_ext", "K_intrinsic",
                    "lambda", "sigma", "h_uv", "rank2"]
STRICTION_HEADER = ["u", "v_root", "x", "y", "z", "branch_id"]
DIAGNOSTIC_HEADER = ["u", "numeric", "n_roots", "closed_form", "closed_form_v", "diagnostics"]


class Context:
    def __init__(self, args):
        self.scenario = with_step(load_scenario(args.scenario), args.step)
        self.spec = build_spec(self.scenario)
        self.out = Path(args.out)
        self.threads = resolve_threads(args.threads)
        self.step = self.scenario.step
        self.spec.metric.check_point(self.spec.base(self.scenario.grids.u.values()).alpha)
        self.u_grid = self.scenario.grids.u.values()
        if getattr(args, "arc_length", False):
            ax = self.scenario.grids.u
            self.spec, length = arc_length_spec(self.spec, (ax.start, ax.stop))
            self.u_grid = np.linspace(0.0, length, ax.num)
            log.info("base curve length %.12g over u in [%g, %g]", length, ax.start, ax.stop)

    @property
    def name(self):
        return self.scenario.name


# ---------------------------------------------------------------------------
# shared computations


def _sweep(ctx):
    u = ctx.scenario.grids.u.values()
    v = ctx.scenario.grids.v.values()
    parts = map_chunks(lambda c: ruling_sweep(ctx.spec, c, v, ctx.step), u, ctx.threads)
    return SurfaceJet(**{f.name: np.concatenate([getattr(p, f.name) for p in parts])
                         for f in dataclasses.fields(SurfaceJet)})


def _curvature(ctx):
    jets = _sweep(ctx)
    if not jets.rank2.any():
        raise RankDeficientPlane("X_u and X_v are dependent on the whole grid")
    return jets, curvature_grid(ctx.spec, None, None, ctx.step, jets=jets)


def _curvature_rows(jets, rep):
    nu, nv = jets.valid.shape
    rows = []
    for i in range(nu):
        for j in range(nv):
            p = jets.point[i, j]
            rows.append([i, j, jets.u[i, j], jets.v[i, j], *p, rep.K_ambient[i, j], rep.K_ext[i, j],
                         rep.K_intrinsic[i, j], rep.lam[i, j], rep.sigma[i, j], rep.h_uv[i, j],
                         int(rep.rank2[i, j])])
    return rows


def _mesh_files(ctx, jets, stem, lines=(), extra_vertices=None):
    verts, faces, index = grid_mesh(jets.point, jets.valid)
    polylines = []
    if extra_vertices is not None and len(extra_vertices):
        base = len(verts)
        verts = np.concatenate([verts, np.asarray(extra_vertices)])
        polylines = [[base + k for k in ln] for ln in lines]
    obj = ctx.out / f"{stem}.obj"
    write_obj(obj, verts, faces, polylines,
              comment=f"{ctx.name}: {jets.valid.shape[0]} x {jets.valid.shape[1]} grid, chart coordinates")
    return obj, index


# ---------------------------------------------------------------------------
# subcommands


def cmd_mesh(ctx):
    jets, rep = _curvature(ctx)
    obj, index = _mesh_files(ctx, jets, "mesh")
    rows = [[r[0], r[1], int(index[r[0], r[1]]), *r[2:]] for r in _curvature_rows(jets, rep)]
    attrs = ctx.out / "mesh_attributes.csv"
    write_csv(attrs, ["i", "j", "vertex"] + CURVATURE_HEADER[2:], rows)
    return [obj, attrs]


def cmd_curvature(ctx):
    jets, rep = _curvature(ctx)
    path = ctx.out / "curvature.csv"
    write_csv(path, CURVATURE_HEADER, _curvature_rows(jets, rep))
    ok = rep.rank2
    log.info("K_ext in [%.3g, %.3g] over %d rank-2 points", np.nanmin(rep.K_ext[ok]),
             np.nanmax(rep.K_ext[ok]), int(ok.sum()))
    return [path]


def cmd_invariants(ctx):
    inv = sannia_invariants(ctx.spec, ctx.u_grid, eps_gp=ctx.scenario.tolerances.eps_gp)
    path = ctx.out / "invariants.csv"
    write_invariants_csv(path, inv)
    return [path]


def _striction(ctx):
    sc = ctx.scenario
    v_range = sc.striction.v_range or (sc.grids.v.start, sc.grids.v.stop)
    tol = sc.tolerances

    def run(chunk):
        return find_striction_numeric(ctx.spec, chunk, v_range, n_coarse=sc.striction.n_coarse, step=ctx.step,
                                      eps_root=tol.eps_root, eps_touch=tol.eps_touch).verdicts

    verdicts = [vd for part in map_chunks(run, sc.grids.u.values(), ctx.threads) for vd in part]
    return v_range, StrictionResult(verdicts=verdicts, branches=assemble_branches(verdicts))


def cmd_striction(ctx):
    v_range, res = _striction(ctx)
    rows = [[u, v, *p, br.branch_id] for br in res.branches for u, v, p in zip(br.u, br.v, br.points)]
    rows.sort(key=lambda r: (r[5], r[0]))
    csv_path = ctx.out / "striction.csv"
    write_csv(csv_path, STRICTION_HEADER, rows)

    jets = _sweep(ctx)
    extra, lines = [], []
    for br in res.branches:
        lines.append(list(range(len(extra), len(extra) + len(br.points))))
        extra.extend(br.points)
    obj, _ = _mesh_files(ctx, jets, "striction", lines, np.array(extra).reshape(-1, 3))

    k = ctx.spec.metric.curvature
    closed = spaceform_striction_v(ctx.spec, [vd.u for vd in res.verdicts], k) if k is not None else None
    diag = []
    for i, vd in enumerate(res.verdicts):
        row = [vd.u, vd.kind, len(vd.roots)]
        if closed is not None:
            c = closed[i]
            row += [c.kind, c.v, "; ".join(d for d in (vd.diagnostics, c.diagnostics) if d)]
        else:
            row += ["n/a", math.nan, vd.diagnostics]
        diag.append(row)
    diag_path = ctx.out / "striction_diagnostics.csv"
    write_csv(diag_path, DIAGNOSTIC_HEADER, diag)

    print(f"{ctx.name}: {len(res.branches)} striction branch(es) on v in [{v_range[0]:g}, {v_range[1]:g}]")
    for br in res.branches:
        print(f"  branch {br.branch_id}: {len(br.u)} rulings, v from {min(br.v):.10g} to {max(br.v):.10g}")
    if not res.branches:
        notes = sorted({d[5] for d in diag if d[5]})
        for n in notes:
            print(f"  {n}")
    return [csv_path, obj, diag_path]


def cmd_reconstruct(ctx):
    sc = ctx.scenario
    src = Path(sc.reconstruct.invariants_csv) if sc.reconstruct.invariants_csv else ctx.out / "invariants.csv"
    if not src.is_file():
        raise ScenarioError(f"invariant table {src} not found; run 'invariants' first")
    inv = read_invariants_csv(src)
    u0 = float(inv.u[0]) if sc.reconstruct.u0 is None else sc.reconstruct.u0
    u_range = sc.reconstruct.u_range or (float(inv.u[0]), float(inv.u[-1]))
    frame = sannia_frame_at(ctx.spec, u0, eps_gp=sc.tolerances.eps_gp)
    presc = prescription_from_table(inv, frame.point, frame, u0=u0)
    rec = reconstruct(ctx.spec.metric, presc, u_range, ctx.step)
    if rec.exited:
        log.warning("reconstructed curve left the chart at u = %.6g", rec.exit_param)
    path = ctx.out / "reconstruct.csv"
    write_csv(path, RECON_HEADER, rec.to_rows())
    return [path]


def cmd_verify(args):
    from .verification import run_all

    only = set(args.only.split(",")) if args.only else None
    results = run_all(step=args.step or 1e-3, only=only)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.criterion:<3} {r.name:<{width}}  {r.value:10.3e}  limit {r.threshold:.1e}  {r.detail}"
              .rstrip())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed} passed, {failed} failed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


COMMANDS = {
    "mesh": cmd_mesh,
    "curvature": cmd_curvature,
    "invariants": cmd_invariants,
    "striction": cmd_striction,
    "reconstruct": cmd_reconstruct,
}


def build_parser():
    p = argparse.ArgumentParser(prog="ruledgeom", description="Ruled surfaces in Riemannian 3-manifolds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--scenario", required=True,
                       help=f"scenario JSON path or bundled name ({', '.join(bundled_names())})")
        s.add_argument("--out", default=".", help="output directory (default: current)")
        if name in ("invariants", "reconstruct"):
            s.add_argument("--arc-length", action="store_true",
                           help="reparametrize the base curve by arc length (the u column then holds s)")
        _common(s)
    v = sub.add_parser("verify", help="run the acceptance checks")
    v.add_argument("--only", help="comma-separated criterion keys, e.g. 1,3-4,9")
    _common(v)
    return p


def _common(s):
    s.add_argument("--step", type=float, help="integration step (default: scenario value)")
    s.add_argument("--threads", type=int, help="worker threads (default: $RULEDGEOM_THREADS or 1)")
    s.add_argument("-v", "--verbose", action="store_true")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.step is not None and not args.step > 0:
        print("error: --step must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "verify":
            return cmd_verify(args)
        ctx = Context(args)
        for path in COMMANDS[args.command](ctx):
            print(path)
        return EXIT_OK
    except (ScenarioError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except GeometryError as exc:
        print(f"geometry error: {exc}", file=sys.stderr)
        return EXIT_GEOMETRY


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
