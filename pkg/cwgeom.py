"""
cwgeom - Main Orchestrator
Runs the constrained-workspace triangulation and Voronoi pipelines on a
point file, checks them against the oracles, benchmarks and calibrates them.
"""

import argparse
import logging
import math
import sys
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, TextIO, Union

import numpy as np
from dotenv import load_dotenv

from tools.cw_voronoi import (
    EMIT_DELAUNAY,
    EMIT_VERTICES,
    compute_voronoi,
    measure_first_phase,
    voronoi_budget_words,
)
from tools.oracles import oracle_delaunay, validate_triangulation
from tools.sampler import Rng
from tools.tri_pipeline import triangulate_general, triangulate_sorted
from tools.workspace_harness import (
    AUDIT_CSV_COLUMNS,
    CwGeomError,
    OutputSink,
    ReadOnlyArray,
    UnmeteredBudget,
    WorkspaceRun,
    audit_report,
    format_audit_for_display,
)
from utils.config import DEFAULT_CONFIG, RunConfig
from utils.helpers import random_points, read_points_file

logger = logging.getLogger("cwgeom")

GENERAL = "general"
SORTED = "sorted"

Source = Union[str, Sequence]


class VerificationFailed(CwGeomError):
    """Constrained output differs from the oracle."""


class BenchRunFailed(CwGeomError):
    """One bench run did not complete; carries that run's exit code."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class CwGeom:
    """
    Orchestrates the constrained-workspace pipelines

    Args:
        verbose: Log numbered pipeline steps to stderr
        config: Run constants; defaults to `config_path`, then CWGEOM_* variables
        config_path: Flat KEY=value file read with python-dotenv
    """

    def __init__(self, verbose: bool = False, config: Optional[RunConfig] = None,
                 config_path: Optional[str] = None):
        self.verbose = verbose
        load_dotenv()
        if config is None:
            config = RunConfig.from_file(config_path) if config_path else RunConfig.from_env()
        self.config = config
        if verbose and not logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            handler.setFormatter(logging.Formatter("%(message)s"))
            logger.addHandler(handler)
            logger.setLevel(logging.INFO)

    def _step(self, index: int, total: int, message: str) -> None:
        logger.info("[%d/%d] %s", index, total, message)

    @staticmethod
    def _load(source: Source) -> List:
        if isinstance(source, str):
            return read_points_file(source)
        return list(source)

    @staticmethod
    def _fail(results: Dict[str, Any], error: CwGeomError) -> Dict[str, Any]:
        results["status"] = "error"
        results["error"] = str(error)
        results["exit_code"] = error.exit_code
        logger.info("✗ %s", error)
        return results

    def triangulate(self, source: Source, s: int, mode: str = GENERAL,
                    sink: Optional[OutputSink] = None) -> Dict[str, Any]:
        """
        Triangulate a point set in O(s) words

        Args:
            source: Points file path or sequence of Points
            s: Workspace parameter
            mode: GENERAL for any order, SORTED for x-sorted input
            sink: Output sink; a counting sink when omitted

        Returns:
            Results dict with status, steps and the audit record
        """
        results: Dict[str, Any] = {"status": "in_progress", "steps": {}}
        try:
            self._step(1, 3, "Loading input...")
            array = ReadOnlyArray(self._load(source))
            results["steps"]["input"] = {"n": len(array), "digest": array.digest()}

            self._step(2, 3, f"Triangulating ({mode}, s={s})...")
            sink = sink if sink is not None else OutputSink("edge")
            pipeline = triangulate_sorted if mode == SORTED else triangulate_general
            with WorkspaceRun(array, s, self.config.budget_c_triangulation * max(2, s), sink) as run:
                summary = pipeline(array, s, sink, run.budget)
            results["steps"]["triangulation"] = {
                "edges": summary.edges,
                "hull_edges": summary.hull_edges,
                "mountains": summary.mountains,
            }

            self._step(3, 3, "Auditing...")
            results["audit"] = audit_report(run)
            results["status"] = "complete"
            logger.info("✓ %d edges", summary.edges)
            return results
        except CwGeomError as e:
            return self._fail(results, e)

    def voronoi(self, source: Source, s: int, seed: Optional[int] = None,
                emit: str = EMIT_VERTICES, sink: Optional[OutputSink] = None,
                reject_degenerate: bool = False) -> Dict[str, Any]:
        """
        Voronoi vertices or Delaunay edges in O(s + n/s) words

        Returns:
            Results dict; `seed` reproduces the run
        """
        results: Dict[str, Any] = {"status": "in_progress", "steps": {}}
        try:
            self._step(1, 3, "Loading input...")
            array = ReadOnlyArray(self._load(source))
            rng = Rng(seed)
            results["seed"] = rng.seed
            results["steps"]["input"] = {"n": len(array), "digest": array.digest()}

            self._step(2, 3, f"Computing Voronoi {emit} (s={s}, seed={rng.seed})...")
            if sink is None:
                sink = OutputSink("vertex" if emit == EMIT_VERTICES else "edge")
            limit = voronoi_budget_words(self.config, len(array), s)
            with WorkspaceRun(array, s, limit, sink) as run:
                stats = compute_voronoi(array, s, sink, self.config, rng, run.budget, emit,
                                        reject_degenerate)
            results["steps"]["voronoi"] = {
                "vertices": stats.vertices_emitted,
                "edges": stats.edges_emitted,
                "restarts": stats.restarts,
                "rounds": stats.rounds,
                "sample_size": stats.sample_size,
                "max_conflict_set": stats.max_conflict_set,
                "total_conflict_set": stats.total_conflict_set,
            }

            self._step(3, 3, "Auditing...")
            results["audit"] = audit_report(run)
            results["status"] = "complete"
            logger.info("✓ %d vertices after %d restarts", stats.vertices_emitted,
                        stats.restarts)
            return results
        except CwGeomError as e:
            return self._fail(results, e)

    def oracle(self, source: Source, what: str, sink: OutputSink) -> Dict[str, Any]:
        """Unconstrained reference output: delaunay (D lines), hull (H lines) or voronoi (V lines)."""
        results: Dict[str, Any] = {"status": "in_progress", "steps": {}}
        try:
            points = self._load(source)
            diagram = oracle_delaunay(points)
            if what == "delaunay":
                for i, j in sorted(diagram.edges):
                    sink.edge(i, j, tag="D")
            elif what == "hull":
                cycle = diagram.hull
                for k, p in enumerate(cycle):
                    sink.edge(p, cycle[(k + 1) % len(cycle)], tag="H", ordered=False)
            else:
                for tri, center in sorted(zip(diagram.triangles, diagram.centers),
                                          key=lambda item: sorted(item[0])):
                    sink.vertex(tri, center)
            results["steps"]["oracle"] = {"triangles": len(diagram.triangles),
                                          "hull": len(diagram.hull)}
            results["status"] = "complete"
            return results
        except CwGeomError as e:
            return self._fail(results, e)

    def verify(self, source: Source, what: str, s: int, seed: Optional[int] = None,
               mode: str = GENERAL) -> Dict[str, Any]:
        """
        Run a constrained pipeline and compare it with the oracle

        Edge lists are compared as sets (no duplicates allowed), vertices as
        multisets of (sites, exact center).
        """
        points = self._load(source)
        sink = OutputSink("edge", collect=True)
        if what == "triangulation":
            results = self.triangulate(points, s, mode, sink)
        else:
            emit = EMIT_DELAUNAY if what == "delaunay" else EMIT_VERTICES
            results = self.voronoi(points, s, seed, emit, sink)
        if results["status"] != "complete":
            return results
        try:
            if what == "triangulation":
                edges = [(r[1], r[2]) for r in sink.records]
                check = validate_triangulation(points, edges)
                if not check.ok:
                    raise VerificationFailed(f"invalid triangulation: {check}")
            else:
                diagram = oracle_delaunay(points)
                if what == "delaunay":
                    edges = [(r[1], r[2]) for r in sink.records]
                    if len(edges) != len(set(edges)) or set(edges) != diagram.edges:
                        raise VerificationFailed(
                            f"{len(edges)} edges emitted, oracle has {len(diagram.edges)}")
                else:
                    emitted = Counter(r[1:] for r in sink.records)
                    expected = diagram.vertex_multiset()
                    if emitted != expected:
                        raise VerificationFailed(
                            f"{sum(emitted.values())} vertices emitted, oracle has "
                            f"{sum(expected.values())}")
            results["steps"]["verify"] = {"against": "oracle", "equal": True}
            logger.info("✓ output matches the oracle")
            return results
        except CwGeomError as e:
            return self._fail(results, e)

    def _bench_run(self, algorithm: str, n: int, s: int, seed: int):
        points = random_points(n, np.random.default_rng(seed))
        if algorithm == "voronoi":
            results = self.voronoi(points, s, seed)
        else:
            results = self.triangulate(points, s)
        if results["status"] != "complete":
            raise BenchRunFailed(f"bench run n={n} s={s} seed={seed}: {results['error']}",
                                 results["exit_code"])
        return results["audit"]

    def bench(self, n_grid: Sequence[int], s_grid: Sequence[int], seeds: Sequence[int],
              algorithm: str = "triangulate", workers: int = 4) -> Dict[str, Any]:
        """
        Audit grid over random instances, one run per worker thread

        Returns:
            Results dict whose `rows` are AuditReports ordered by seed, n, s
        """
        tasks = [(n, s, seed) for seed in seeds for n in n_grid for s in s_grid]
        self._step(1, 1, f"Benchmarking {algorithm} on {len(tasks)} runs...")
        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            rows = list(pool.map(lambda task: self._bench_run(algorithm, *task), tasks))
        return {"status": "complete", "steps": {"bench": {"runs": len(rows)}}, "rows": rows}

    def calibrate(self, source: Source, s: int, seeds: Sequence[int]) -> Dict[str, Any]:
        """
        Measure first-phase conflict mass and excess over a seed range

        Proposes the smallest C_M and C_T whose restart rate stays below 25%
        and reports the amplification rounds and restarts of full runs.
        """
        points = self._load(source)
        array = ReadOnlyArray(points)
        n = len(array)
        self._step(1, 2, f"Sampling first phases over {len(seeds)} seeds...")
        masses, excesses = [], []
        for seed in seeds:
            mass, excess = measure_first_phase(array, s, Rng(seed), UnmeteredBudget())
            masses.append(mass / n)
            excesses.append(excess / s)

        self._step(2, 2, "Running full computations...")
        proposed = self.config.replace(c_m=_below_quarter(masses), c_t=_below_quarter(excesses))
        rounds, restarts = [], []
        for seed in seeds:
            stats = compute_voronoi(array, s, OutputSink("vertex"), proposed, Rng(seed),
                                    UnmeteredBudget())
            rounds.append(stats.rounds)
            restarts.append(stats.restarts)
        return {
            "status": "complete",
            "steps": {"calibrate": {"runs": len(seeds)}},
            "values": {
                "C_M": proposed.c_m,
                "C_T": proposed.c_t,
                "MEAN_ROUNDS": float(np.mean(rounds)),
                "MAX_ROUNDS": int(np.max(rounds)),
                "MEAN_RESTARTS": float(np.mean(restarts)),
            },
        }


def _below_quarter(ratios: Sequence[float]) -> int:
    """Smallest integer threshold that fewer than a quarter of the ratios exceed."""
    ordered = np.sort(np.asarray(ratios, dtype=float))
    index = min(len(ordered) - 1, math.ceil(0.75 * len(ordered)))
    return max(1, math.ceil(ordered[index]))


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="KEY=value constants file")
    common.add_argument("--verbose", action="store_true", help="log pipeline steps to stderr")

    parser = argparse.ArgumentParser(prog="cwgeom",
                                     description="Constrained-workspace triangulation and Voronoi")
    commands = parser.add_subparsers(dest="command", required=True)

    tri = commands.add_parser("triangulate", parents=[common])
    tri.add_argument("--input", required=True)
    tri.add_argument("--workspace", "-s", type=int, required=True)
    tri.add_argument("--mode", choices=[SORTED, GENERAL], default=GENERAL)
    tri.add_argument("--audit", action="store_true")
    tri.add_argument("--out")

    vor = commands.add_parser("voronoi", parents=[common])
    vor.add_argument("--input", required=True)
    vor.add_argument("--workspace", "-s", type=int, required=True)
    vor.add_argument("--seed", type=int)
    vor.add_argument("--emit", choices=[EMIT_VERTICES, EMIT_DELAUNAY], default=EMIT_VERTICES)
    vor.add_argument("--reject-degenerate", action="store_true")
    vor.add_argument("--audit", action="store_true")
    vor.add_argument("--out")

    ora = commands.add_parser("oracle", parents=[common])
    ora.add_argument("--input", required=True)
    ora.add_argument("--what", choices=["delaunay", "hull", "voronoi"], default="delaunay")
    ora.add_argument("--out")

    bench = commands.add_parser("bench", parents=[common])
    bench.add_argument("--n-grid", type=_int_list, required=True)
    bench.add_argument("--s-grid", type=_int_list, required=True)
    bench.add_argument("--seeds", type=_int_list, default=[0])
    bench.add_argument("--algorithm", choices=["triangulate", "voronoi"], default="triangulate")
    bench.add_argument("--workers", type=int, default=4)
    bench.add_argument("--out")

    ver = commands.add_parser("verify", parents=[common])
    ver.add_argument("--input", required=True)
    ver.add_argument("--against", choices=["oracle"], default="oracle")
    ver.add_argument("--what", choices=["triangulation", "voronoi", "delaunay"],
                     default="triangulation")
    ver.add_argument("--workspace", "-s", type=int, required=True)
    ver.add_argument("--mode", choices=[SORTED, GENERAL], default=GENERAL)
    ver.add_argument("--seed", type=int)

    cal = commands.add_parser("calibrate", parents=[common])
    cal.add_argument("--input")
    cal.add_argument("--n", type=int, default=1024, help="random instance size without --input")
    cal.add_argument("--workspace", "-s", type=int, default=64)
    cal.add_argument("--seeds", type=int, default=100)
    return parser


def _open_out(path: Optional[str]) -> TextIO:
    return open(path, "w") if path else sys.stdout


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    args = build_parser().parse_args(argv)
    try:
        geom = CwGeom(verbose=args.verbose, config_path=args.config)
    except CwGeomError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code

    out = None
    try:
        if args.command in ("triangulate", "voronoi", "oracle"):
            out = _open_out(args.out)
        if args.command == "triangulate":
            results = geom.triangulate(args.input, args.workspace, args.mode,
                                       OutputSink("edge", out))
        elif args.command == "voronoi":
            kind = "vertex" if args.emit == EMIT_VERTICES else "edge"
            results = geom.voronoi(args.input, args.workspace, args.seed, args.emit,
                                   OutputSink(kind, out), args.reject_degenerate)
        elif args.command == "oracle":
            kind = "vertex" if args.what == "voronoi" else "edge"
            results = geom.oracle(args.input, args.what, OutputSink(kind, out))
        elif args.command == "verify":
            results = geom.verify(args.input, args.what, args.workspace, args.seed, args.mode)
        elif args.command == "bench":
            results = geom.bench(args.n_grid, args.s_grid, args.seeds, args.algorithm,
                                 args.workers)
            target = _open_out(args.out)
            try:
                target.write(",".join(AUDIT_CSV_COLUMNS) + "\n")
                for row in results["rows"]:
                    target.write(row.to_csv_row() + "\n")
            finally:
                if target is not sys.stdout:
                    target.close()
        else:
            if args.input:
                source = args.input
            else:
                source = random_points(args.n, np.random.default_rng(0))
            results = geom.calibrate(source, args.workspace, list(range(args.seeds)))
            for key, value in results["values"].items():
                prefix = "" if key in DEFAULT_CONFIG else "# "
                print(f"{prefix}{key}={value}")
    except CwGeomError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    finally:
        if out is not None and out is not sys.stdout:
            out.close()

    if results["status"] != "complete":
        print(f"error: {results['error']}", file=sys.stderr)
        return results["exit_code"]
    if getattr(args, "audit", False):
        print(format_audit_for_display(results["audit"], results.get("seed")), file=sys.stderr)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
