"""Command-line front end.

Exit codes: 0 success, 1 a domain check failed (invalid graph, failed
verification, unpaired input), 2 usage or parse errors.  All randomness
flows from ``--seed`` through numpy's PCG64; reports are byte-identical
across runs up to the runtime_ms fields.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import fock_rosly as fr
from . import graph_moves as gmv
from . import kitaev_space as ks
from . import properties as pr
from . import ribbon_graph as rg
from .decoupling import Decoupling
from .double_group import make_backend
from .errors import NotPaired, PoissonKitaevError


def _load_graph_or_exit(path: str) -> rg.RibbonGraph:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            desc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot parse {path}: {exc}", err=True)
        sys.exit(2)
    try:
        return rg.validate_graph(desc)
    except PoissonKitaevError as exc:
        click.echo(f"invalid graph: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)


def _check_config(samples: int, fd_step: float):
    if samples < 1:
        click.echo("error: --samples must be >= 1", err=True)
        sys.exit(2)
    if not (1e-8 < fd_step < 1e-2):
        click.echo("error: --fd-step must lie in (1e-8, 1e-2)", err=True)
        sys.exit(2)


@click.group()
def main():
    """Poisson-geometric Kitaev models: graph checks and numerical verification."""


@main.command("check-graph")
@click.argument("graph_path", type=click.Path(exists=True))
def cmd_check_graph(graph_path):
    """Validate a graph file and print its surface signature."""
    graph = _load_graph_or_exit(graph_path)
    genus, boundary = rg.surface_signature(graph, [])
    sites = rg.detect_sites(graph)
    click.echo(f"valid: {len(graph.vertices)} vertices, {len(graph.edges)} edges, "
               f"{len(graph.faces)} faces")
    click.echo(f"closed-surface genus {genus} (boundary {boundary})")
    click.echo(f"paired: {rg.is_paired(graph)}; sites: "
               + (", ".join(f"({v},{f})" for v, f in sites) or "none"))


@main.command("verify")
@click.argument("graph_path", type=click.Path(exists=True))
@click.option("--suite", default="all", help="catalog entry name or 'all'")
@click.option("--backend", "backend_name", default="sl2c",
              help="sl2c or abelian:<n>")
@click.option("--samples", default=25, type=int)
@click.option("--seed", default=0, type=int)
@click.option("--tol", default=None, type=float, help="override all tolerances")
@click.option("--fd-step", default=1e-5, type=float)
@click.option("--out", default=None, type=click.Path(), help="report JSON path")
def cmd_verify(graph_path, suite, backend_name, samples, seed, tol, fd_step, out):
    """Run the named property suite (or all of them) on a graph."""
    _check_config(samples, fd_step)
    graph = _load_graph_or_exit(graph_path)
    try:
        backend = make_backend(backend_name)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    if suite == "all":
        names = sorted(pr.CATALOG)
    elif suite in pr.CATALOG:
        names = [suite]
    else:
        click.echo(f"error: unknown suite {suite!r}; known: "
                   + ", ".join(sorted(pr.CATALOG)), err=True)
        sys.exit(2)

    results = pr.run_suite(names, backend, graph, samples=samples, seed=seed,
                           h=fd_step, tol=tol)
    failed = 0
    for r in results:
        if r.skipped:
            status = f"SKIP ({r.skip_reason})"
        elif r.passed:
            status = "pass"
        else:
            status = "FAIL"
            failed += 1
        click.echo(f"{r.name:32s} {r.max_residual:12.3e}  tol {r.tolerance:8.1e}  {status}")
    if out:
        report = {
            "config": {"backend": backend.name, "suite": suite, "samples": samples,
                       "seed": seed, "fd_step": fd_step, "tol": tol},
            "checks": [r.to_json() for r in results],
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        click.echo(f"report written to {out}")
    click.echo(f"{len(results) - failed}/{len(results)} checks passed"
               + ("" if not failed else f", {failed} FAILED"))
    sys.exit(1 if failed else 0)


@main.command("transform")
@click.argument("graph_path", type=click.Path(exists=True))
@click.argument("script_path", type=click.Path(exists=True))
@click.option("--point", "point_path", default=None, type=click.Path(exists=True))
@click.option("--backend", "backend_name", default="sl2c")
@click.option("--out-graph", default=None, type=click.Path())
@click.option("--out-point", default=None, type=click.Path())
def cmd_transform(graph_path, script_path, point_path, backend_name,
                  out_graph, out_point):
    """Replay a move script on a graph (and optionally a point)."""
    graph = _load_graph_or_exit(graph_path)
    try:
        with open(script_path, "r", encoding="utf-8") as fh:
            moves = [rg.MoveRecord.from_json(m) for m in json.load(fh)]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        click.echo(f"error: cannot parse move script: {exc}", err=True)
        sys.exit(2)
    backend = make_backend(backend_name)
    point = None
    if point_path:
        try:
            _, point = ks.load_point(point_path, backend)
        except (OSError, json.JSONDecodeError, PoissonKitaevError) as exc:
            click.echo(f"error: cannot load point: {exc}", err=True)
            sys.exit(2)
    try:
        new_graph, new_point = gmv.replay(backend, graph, moves, point)
    except PoissonKitaevError as exc:
        click.echo(f"replay failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"applied {len(moves)} moves: {len(new_graph.vertices)} vertices, "
               f"{len(new_graph.edges)} edges, {len(new_graph.faces)} faces; "
               f"paired: {rg.is_paired(new_graph)}")
    if out_graph:
        with open(out_graph, "w", encoding="utf-8") as fh:
            fh.write(new_graph.dumps())
        click.echo(f"graph written to {out_graph}")
    if out_point and new_point is not None:
        ks.save_point(backend, new_point, out_point)
        click.echo(f"point written to {out_point}")


@main.command("iso-roundtrip")
@click.argument("graph_path", type=click.Path(exists=True))
@click.argument("point_path", type=click.Path(exists=True))
@click.option("--backend", "backend_name", default="sl2c")
@click.option("--samples", default=5, type=int, help="random group elements for equivariance")
@click.option("--seed", default=0, type=int)
@click.option("--tol", default=1e-10, type=float)
@click.option("--out", default=None, type=click.Path())
def cmd_iso_roundtrip(graph_path, point_path, backend_name, samples, seed, tol, out):
    """Decouple a point, map it back, and check the isomorphism identities."""
    graph = _load_graph_or_exit(graph_path)
    backend = make_backend(backend_name)
    try:
        _, point = ks.load_point(point_path, backend)
    except (OSError, json.JSONDecodeError, PoissonKitaevError) as exc:
        click.echo(f"error: cannot load point: {exc}", err=True)
        sys.exit(2)
    if set(point) != set(graph.edge_by_id):
        click.echo("error: point does not decorate this graph's edges", err=True)
        sys.exit(2)
    try:
        dec = Decoupling(backend, graph)
    except NotPaired:
        click.echo("graph is not paired; run a pairing transform first", err=True)
        sys.exit(1)

    rng = pr.check_rng(seed, "iso-roundtrip")
    res = {}
    image = dec.phi(point)
    res["psi_phi_roundtrip"] = ks.point_distance(backend, dec.psi(image), point)
    coupled = {e: backend.random_element(rng) for e in point}
    res["phi_psi_roundtrip"] = ks.point_distance(backend, dec.phi(dec.psi(coupled)), coupled)

    equi = 0.0
    inter = 0.0
    sites = rg.detect_sites(graph)
    for _ in range(samples):
        g = backend.random_element(rng)
        for site in sites:
            lhs = fr.fr_vertex_action(backend, graph, site[0], g, image)
            rhs = dec.phi(ks.site_action(backend, graph, site, g, point))
            equi = max(equi, ks.point_distance(backend, lhs, rhs))
    for site in sites:
        loop = rg.vertex_path(graph, site[0]) * rg.face_path(graph, site[1])
        lhs = fr.hol_fr(backend, graph, loop, image)
        rhs = ks.hol(backend, graph, loop, point)
        inter = max(inter, backend.distance(lhs, rhs))
    res["site_action_equivariance"] = equi
    res["site_holonomy_intertwining"] = inter

    ok = all(v < tol for v in res.values())
    for k, v in res.items():
        click.echo(f"{k:28s} {v:12.3e}  {'pass' if v < tol else 'FAIL'}")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            json.dump({"tolerance": tol, "residuals": res}, fh, indent=2, sort_keys=True)
        click.echo(f"report written to {out}")
    sys.exit(0 if ok else 1)


if __name__ == "__main__":
    main()
