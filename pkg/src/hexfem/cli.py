"""Command-line driver: mesh generation, matrix builds, and a benchmark table."""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import threading
import time
from dataclasses import asdict, dataclass

from .assemble import (
    DirectAssembler,
    build_triplet,
    connectivity_index_arrays,
    triplet_to_csc,
)
from .errors import ConfigurationError, HexFemError
from .integrate import HostBackend, integrate_all, plan_batches, required_bytes
from .mesh import StructuredGridSpec, generate_cube_mesh, load_mesh, save_mesh
from .sparseio import (
    csc_memory,
    export_matrix_market,
    format_mb,
    format_percent,
    memory_saving,
    triplet_memory,
)

__all__ = ["BuildReport", "run_build", "main"]

BUDGET_ENV_VAR = "HEXFEM_BUDGET_MB"
_DEFAULT_BUDGET_MB = 1024.0


@dataclass(frozen=True)
class BuildReport:
    """Everything one build produced: sizes, sparsity, memory, and stage times."""

    n_el: int
    n_nodes: int
    nnz_triplet: int
    nnz_csc: int
    nnz_compression: float
    triplet_mb: float
    csc_mb: float
    memory_saving: float
    time_integration_s: float
    time_index_s: float | None
    time_assembly_s: float
    time_total_s: float
    pct_integration: float
    pct_assembly: float
    group_count: int
    workers: int
    mode: str
    assembler: str

    def as_dict(self) -> dict:
        return asdict(self)


def run_build(mesh, budget_bytes: int, workers: int = 1, mode: str = "sequential",
              assembler: str = "direct"):
    """Integrate and assemble one mesh; returns (LowerCscMatrix, BuildReport)."""
    if assembler not in ("direct", "triplet"):
        raise ConfigurationError(f"assembler must be 'direct' or 'triplet', got {assembler!r}")
    plan = plan_batches(required_bytes(mesh.n_el), budget_bytes, mesh.n_el)

    wall_start = time.perf_counter()
    with HostBackend(workers=workers) as backend:
        if assembler == "direct":
            t0 = time.perf_counter()
            direct = DirectAssembler(mesh)
            time_assembly = time.perf_counter() - t0
            consumed = 0.0

            def consume(rng, vals):
                nonlocal consumed
                c0 = time.perf_counter()
                direct.consume(rng, vals)
                consumed += time.perf_counter() - c0

            t0 = time.perf_counter()
            integrate_all(mesh, backend, plan, mode=mode, consumer=consume)
            time_integration = time.perf_counter() - t0
            t0 = time.perf_counter()
            matrix = direct.finish()
            time_assembly += consumed + (time.perf_counter() - t0)
            time_index = None
        else:
            if mode == "overlapped":
                # Index generation runs beside the integration stage.
                index_result = {}

                def generate_indices():
                    g0 = time.perf_counter()
                    index_result["arrays"] = connectivity_index_arrays(mesh)
                    index_result["seconds"] = time.perf_counter() - g0

                index_thread = threading.Thread(target=generate_indices)
                index_thread.start()
                t0 = time.perf_counter()
                batch = integrate_all(mesh, backend, plan, mode=mode)
                time_integration = time.perf_counter() - t0
                index_thread.join()
                rows, cols = index_result["arrays"]
                time_index = index_result["seconds"]
            else:
                t0 = time.perf_counter()
                batch = integrate_all(mesh, backend, plan, mode=mode)
                time_integration = time.perf_counter() - t0
                t0 = time.perf_counter()
                rows, cols = connectivity_index_arrays(mesh)
                time_index = time.perf_counter() - t0
            t0 = time.perf_counter()
            triplet = build_triplet(mesh, batch, rows=rows, cols=cols)
            matrix = triplet_to_csc(triplet)
            time_assembly = time_index + (time.perf_counter() - t0)
    time_total = time.perf_counter() - wall_start

    nnz_triplet = 36 * mesh.n_el
    trip_mb = triplet_memory(nnz_triplet)
    matrix_mb = csc_memory(matrix.nnz, matrix.dim)
    stage_sum = time_integration + time_assembly
    pct_integration = 100.0 * time_integration / stage_sum if stage_sum > 0 else 100.0
    report = BuildReport(
        n_el=mesh.n_el,
        n_nodes=mesh.n_nodes,
        nnz_triplet=nnz_triplet,
        nnz_csc=matrix.nnz,
        nnz_compression=1.0 - matrix.nnz / nnz_triplet,
        triplet_mb=trip_mb,
        csc_mb=matrix_mb,
        memory_saving=memory_saving(trip_mb, matrix_mb),
        time_integration_s=time_integration,
        time_index_s=time_index,
        time_assembly_s=time_assembly,
        time_total_s=time_total,
        pct_integration=pct_integration,
        pct_assembly=100.0 - pct_integration,
        group_count=plan.group_count,
        workers=workers,
        mode=mode,
        assembler=assembler,
    )
    return matrix, report


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_grid_flags(parser, required):
    parser.add_argument("--nx", type=int, required=required, help="elements along x")
    parser.add_argument("--ny", type=int, required=required, help="elements along y")
    parser.add_argument("--nz", type=int, required=required, help="elements along z")
    parser.add_argument("--h", type=float, default=1.0, help="element edge length")
    parser.add_argument("--c", type=float, default=1.0, help="uniform material coefficient")


def _add_build_flags(parser):
    parser.add_argument("--budget-mb", type=float, default=_DEFAULT_BUDGET_MB,
                        help=f"integration memory budget in MB (overridden by ${BUDGET_ENV_VAR})")
    parser.add_argument("--workers", type=int, default=1, help="parallel integration workers")
    parser.add_argument("--mode", choices=("sequential", "overlapped"), default="sequential")
    parser.add_argument("--assembler", choices=("direct", "triplet"), default="direct")


def _build_parser() -> _Parser:
    parser = _Parser(prog="hexfem",
                     description="Global sparse stiffness matrices from 8-node hexahedral meshes.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("mesh-gen", help="generate a structured cube mesh file")
    _add_grid_flags(gen, required=True)
    gen.add_argument("--out", required=True, help="output mesh file")
    gen.set_defaults(func=cmd_mesh_gen)

    build = sub.add_parser("build", help="build the global matrix and a report")
    build.add_argument("--mesh", help="input mesh file (alternative to --nx/--ny/--nz)")
    _add_grid_flags(build, required=False)
    _add_build_flags(build)
    build.add_argument("--out", help="write the matrix as Matrix Market to this path")
    build.add_argument("--report", help="write the JSON build report here (default: stdout)")
    build.set_defaults(func=cmd_build)

    bench = sub.add_parser("bench", help="sparsity/memory/timing table over cube sizes")
    bench.add_argument("--sizes", required=True, help="comma-separated cube sizes, e.g. 10,20,40")
    bench.add_argument("--repeat", type=int, default=1, help="repeats per size (median times)")
    _add_build_flags(bench)
    bench.add_argument("--out", help="also write the table to this path")
    bench.set_defaults(func=cmd_bench)
    return parser


def _grid_spec_from_flags(args) -> StructuredGridSpec:
    for name in ("nx", "ny", "nz"):
        value = getattr(args, name)
        if value is None:
            raise _UsageError(f"--{name} is required")
        if value < 1:
            raise _UsageError(f"--{name} must be a positive integer, got {value}")
    if args.h <= 0:
        raise _UsageError(f"--h must be positive, got {args.h}")
    if args.c <= 0:
        raise _UsageError(f"--c must be positive, got {args.c}")
    return StructuredGridSpec(nx=args.nx, ny=args.ny, nz=args.nz, h=args.h, c0=args.c)


def _budget_bytes(args) -> int:
    budget_mb = args.budget_mb
    env = os.environ.get(BUDGET_ENV_VAR)
    if env is not None:
        try:
            budget_mb = float(env)
        except ValueError:
            raise ConfigurationError(f"${BUDGET_ENV_VAR} must be a number, got {env!r}") from None
    if budget_mb <= 0:
        raise ConfigurationError(f"memory budget must be positive, got {budget_mb}")
    return int(budget_mb * 10**6)


def cmd_mesh_gen(args) -> int:
    mesh = generate_cube_mesh(_grid_spec_from_flags(args))
    save_mesh(mesh, args.out)
    print(f"wrote {args.out}: {mesh.n_nodes} nodes, {mesh.n_el} elements")
    return 0


def cmd_build(args) -> int:
    if args.mesh is not None:
        mesh = load_mesh(args.mesh)
    else:
        mesh = generate_cube_mesh(_grid_spec_from_flags(args))
    matrix, report = run_build(
        mesh,
        budget_bytes=_budget_bytes(args),
        workers=args.workers,
        mode=args.mode,
        assembler=args.assembler,
    )
    if args.out:
        export_matrix_market(matrix, args.out)
    payload = json.dumps(report.as_dict(), indent=2)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


_BENCH_COLUMNS = [
    "n_el",
    "matrix_size",
    "nnz_triplet",
    "nnz_csc",
    "nnz_compression",
    "triplet_mb",
    "csc_mb",
    "memory_saving",
    "matgen_time_s",
    "ni_pct",
    "assembly_pct",
]


def cmd_bench(args) -> int:
    try:
        sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        raise _UsageError(f"--sizes must be comma-separated integers, got {args.sizes!r}") from None
    if not sizes or any(n < 1 for n in sizes):
        raise _UsageError(f"--sizes must be positive integers, got {args.sizes!r}")
    if args.repeat < 1:
        raise _UsageError(f"--repeat must be at least 1, got {args.repeat}")
    budget = _budget_bytes(args)

    lines = ["\t".join(_BENCH_COLUMNS)]
    for n in sizes:
        mesh = generate_cube_mesh(StructuredGridSpec(nx=n, ny=n, nz=n))
        reports = [
            run_build(mesh, budget_bytes=budget, workers=args.workers,
                      mode=args.mode, assembler=args.assembler)[1]
            for _ in range(args.repeat)
        ]
        r = reports[0]
        matgen = statistics.median(rep.time_integration_s + rep.time_assembly_s for rep in reports)
        ni_pct = statistics.median(rep.pct_integration for rep in reports)
        lines.append("\t".join([
            str(r.n_el),
            str(r.n_nodes),
            str(r.nnz_triplet),
            str(r.nnz_csc),
            format_percent(r.nnz_compression),
            format_mb(r.triplet_mb),
            format_mb(r.csc_mb),
            format_percent(r.memory_saving),
            f"{matgen:.4f}",
            f"{ni_pct:.1f}%",
            f"{100.0 - ni_pct:.1f}%",
        ]))
    table = "\n".join(lines)
    print(table)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(table + "\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"hexfem: error: {exc}", file=sys.stderr)
        return 1
    except (HexFemError, ValueError) as exc:
        print(f"hexfem: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"hexfem: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
