"""Command-line driver: ``freelunch {scan,flvr,converge,simulate,oracle,kernels}``.

Exit codes: 0 completed, 1 configuration error or unmet hypothesis,
2 numerical failure or oracle mismatch, 3 free lunch found.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .config import ExperimentConfig, load_config
from .convergence import convergence_table, mc_moment_check
from .errors import ConfigError, DomainError, EnumerationTooLarge, HypothesisViolated, NumericalError
from .innovation import law_rademacher, law_two_point
from .kernel import (
    BrownianConstant,
    FbmMovingAverage,
    FbmSottinen,
    Kernel,
    MixedBm,
    OrnsteinUhlenbeck,
    Rogers,
    Tabulated,
    kernel_to_dict,
)
from .lattice import GridSpec, MarketSpec, decompose, simulate_path
from .lunch import Verdict, certificate_at, flvr_scan, lambda_bar, scan_rows, search_arbitrage
from .oracle import brute_force_oracle
from .reporting import run_metadata, write_csv, write_json

__all__ = ["main", "EXIT_OK", "EXIT_CONFIG", "EXIT_NUMERICAL", "EXIT_FREE_LUNCH", "builtin_kernels"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_FREE_LUNCH = 3

ORACLE_TOL = 1e-12


def builtin_kernels() -> list[Kernel]:
    """One instance of every built-in kernel family, used by ``kernels`` and the oracle matrix."""
    return [
        BrownianConstant(),
        FbmMovingAverage(H=0.75),
        FbmMovingAverage(H=0.45),
        FbmSottinen(H=0.75),
        OrnsteinUhlenbeck(kappa0=1.0, v=1.0),
        Rogers(k=1.0, v=1.0, H=0.75),
        MixedBm(sigma=1.0, H=0.75),
        # sign-changing table with an interior peak above twice kappa(0+)
        Tabulated(theta=(0.0, 0.5, 1.0, 2.0, 3.0), values=(0.2, 0.6, 0.1, -0.3, 0.05)),
    ]


def kernel_id(kern: Kernel) -> str:
    """Compact label such as ``fbm_ma(H=0.75)``."""
    params = ",".join(f"{k}={v}" for k, v in sorted(kern.params().items()))
    return f"{kern.type_name}({params})"


def law_id(law) -> str:
    return "/".join(repr(v) for v in law.values)


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    """Map in order; threads only change wall time, never output order."""
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


class _Run:
    def __init__(self, cfg: Optional[ExperimentConfig], out: Path, threads: int):
        self.cfg = cfg
        self.out = out
        self.threads = max(1, threads)
        out.mkdir(parents=True, exist_ok=True)

    @property
    def meta(self) -> dict:
        if self.cfg is None:
            return run_metadata(None, None)
        return run_metadata(self.cfg.hash, self.cfg.seed)

    def csv(self, name: str, header, rows) -> None:
        write_csv(self.out / name, header, rows, self.meta)

    def json(self, name: str, payload: dict) -> None:
        if self.cfg is not None:
            payload = {"config": self.cfg.to_dict(), **payload}
        write_json(self.out / name, payload, self.meta)


def _row_verdict(market: MarketSpec, grid: GridSpec, j: int, lb: float, lam: float) -> str:
    if lb > lam:
        return Verdict.STRICT.value
    if lb == lam:
        return certificate_at(market, grid, j, lam).verdict.value
    return Verdict.NONE.value


def _flvr_hint(lbs: Sequence[float], lam: float) -> bool:
    """No arbitrage, but lambda_bar climbs toward lam: at least half the gap closed."""
    if len(lbs) < 2 or max(lbs) > lam:
        return False
    first, last = lbs[0], lbs[-1]
    return last > first and (lam - last) <= 0.5 * (lam - first)


def cmd_scan(run: _Run) -> int:
    cfg = run.cfg
    market = cfg.market()

    def one(n: int):
        grid = cfg.grid(n)
        jm = cfg.j_max(n)
        rows = scan_rows(market, grid, jm)
        cert = search_arbitrage(market, grid, jm, cfg.lam)
        table = [(n, j, lb, sup, z, _row_verdict(market, grid, j, lb, cfg.lam)) for j, lb, sup, z in rows]
        return n, table, cert, _flvr_hint([r[2] for r in table], cfg.lam)

    results = _pmap(one, cfg.n_list, run.threads)
    table = [row for _, rows, _, _ in results for row in rows]
    run.csv("scan.csv", ["n", "j", "lambda_bar", "esssup_xy", "essinf_z", "verdict"], table)
    per_n = []
    first = None
    for n, _, cert, hint in results:
        d = {"kernel": kernel_to_dict(cfg.kernel), "law": cfg.law.to_dict(), **cert.to_dict(), "flvr_hint": hint}
        per_n.append(d)
        if first is None and cert.found:
            first = d
    hint = any(d["flvr_hint"] for d in per_n)
    run.json("certificate.json", {"found": first is not None, "certificate": first, "per_n": per_n, "flvr_hint": hint})
    if first is not None:
        print(f"arbitrage: n={first['n']} buy step {first['j_star']} sell step {first['sell_step']} "
              f"lambda_bar={first['lambda_bar']!r} ({first['verdict']})")
        return EXIT_FREE_LUNCH
    print("no arbitrage found" + (" (flvr hint: lambda_bar approaches lambda)" if hint else ""))
    return EXIT_OK


def cmd_flvr(run: _Run) -> int:
    cfg = run.cfg
    market = cfg.market()
    targets = tuple(float(d) for d in cfg.options.get("delta_targets", (0.5, 0.1, 0.02)))
    nu = cfg.options.get("nu")

    def one(n: int):
        return n, flvr_scan(market, cfg.grid(n), cfg.j_max(n), targets, nu)

    results = _pmap(one, cfg.n_list, run.threads)
    rows = [(n, e.j, e.ratio, e.expected_return, e.epsilon) for n, rep in results for e in rep.entries]
    run.csv("flvr.csv", ["n", "j", "ratio", "expected_return", "epsilon"], rows)
    summary = [
        {
            "n": n,
            "achieved_delta": rep.achieved_delta,
            "targets": [{"delta": d, "j": j} for d, j in rep.targets.items()],
            "all_met": rep.all_met,
        }
        for n, rep in results
    ]
    met = any(rep.all_met for _, rep in results)
    run.json("flvr.json", {"flvr_found": met, "per_n": summary})
    for s in summary:
        print(f"n={s['n']}: achieved delta {s['achieved_delta']!r}, all targets met: {s['all_met']}")
    return EXIT_FREE_LUNCH if met else EXIT_OK


def cmd_converge(run: _Run) -> int:
    cfg = run.cfg
    t0 = cfg.t0
    pairs = [tuple(map(float, p)) for p in cfg.options.get("pairs", [[t0 + 0.5, t0 + 1.0]])]
    report = convergence_table(cfg.kernel, cfg.law, t0, pairs, cfg.n_list)
    run.csv("convergence.csv", ["n", "t", "T", "discrete", "limit", "abs_error"], report.rows)
    payload = report.to_dict()
    mc_paths = int(cfg.options.get("mc_paths", 0))
    if mc_paths:
        t = float(cfg.options.get("mc_t", t0 + 1.0))
        market = MarketSpec(kernel=cfg.kernel, law=cfg.law)

        def one(n: int):
            return mc_moment_check(market, cfg.grid(n), t, mc_paths, cfg.seed)

        checks = _pmap(one, cfg.n_list, run.threads)
        payload["moments"] = [
            {
                "n": n,
                "t": t,
                "num_paths": c.num_paths,
                "mean": c.mean,
                "variance": c.variance,
                "analytic_mean": c.analytic_mean,
                "analytic_variance": c.analytic_variance,
                "z_mean": c.z_mean,
                "z_variance": c.z_variance,
            }
            for n, c in zip(cfg.n_list, checks)
        ]
    run.json("converge.json", payload)
    for (t, T), slope in report.slopes.items():
        print(f"(t={t!r}, T={T!r}) log-log slope: {'n/a' if slope is None else repr(slope)}")
    return EXIT_OK


def cmd_simulate(run: _Run) -> int:
    cfg = run.cfg
    market = cfg.market()
    paths = int(cfg.options.get("paths", 1))
    if paths < 1:
        raise ConfigError("options.paths must be >= 1")
    jobs = [(n, p) for n in cfg.n_list for p in range(paths)]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(jobs))

    def one(k: int):
        n, p = jobs[k]
        grid = cfg.grid(n)
        steps = cfg.steps if cfg.steps is not None else grid.steps()
        rng = np.random.Generator(np.random.PCG64(seeds[k]))
        return simulate_path(market, grid, rng, steps=steps)

    sims = _pmap(one, list(range(len(jobs))), run.threads)
    for (n, p), sim in zip(jobs, sims):
        rows = zip(sim.j, sim.times, sim.Z, sim.A, sim.S)
        run.csv(f"path_n{n}_p{p}.csv", ["j", "time", "Z", "A", "S"], rows)
    dj = cfg.options.get("decompose_j")
    if dj is not None:
        for n in cfg.n_list:
            grid = cfg.grid(n)
            dec = decompose(market, grid, grid.j0 + int(dj))
            run.csv(f"decomposition_n{n}.csv", ["j", "x", "z_coeff"], [(dec.j, dec.x, dec.z_coeff)])
            run.csv(f"y_coeffs_n{n}.csv", ["i", "y_coeff"], zip(range(grid.j0, dec.j), dec.y_coeffs))
    print(f"wrote {len(jobs)} path file(s)")
    return EXIT_OK


def _oracle_cases(cfg: ExperimentConfig) -> list:
    max_offset = int(cfg.options.get("max_offset", 10))
    if cfg.options.get("matrix"):
        kernels = builtin_kernels()
        laws = [law_rademacher(), law_two_point(-2.0, 1.0)]
        ns = [1, 2, 4]
    else:
        kernels, laws, ns = [cfg.kernel], [cfg.law], cfg.n_list
    return [(k, law, n, h) for k in kernels for law in laws for n in ns for h in range(max_offset + 1)]


def cmd_oracle(run: _Run) -> int:
    cfg = run.cfg
    cases = _oracle_cases(cfg)

    def one(case):
        kern, law, n, h = case
        market = MarketSpec(kernel=kern, law=law, drift=cfg.drift, past=cfg.past, lam=cfg.lam)
        grid = GridSpec(n, cfg.t0)
        j = grid.j0 + h
        lb = lambda_bar(market, grid, j)
        orc = brute_force_oracle(market, grid, j, cfg.lam)
        diff = abs((lb - cfg.lam) - orc.max_worstcase_return)
        ok = diff <= ORACLE_TOL * max(1.0, abs(lb))
        return (kernel_id(kern), law_id(law), n, j, lb,
                orc.max_worstcase_return + cfg.lam, diff, ok)

    rows = _pmap(one, cases, run.threads)
    run.csv("oracle.csv", ["kernel", "law", "n", "j", "lambda_bar", "oracle", "abs_diff", "match"], rows)
    bad = [r for r in rows if not r[7]]
    run.json("oracle.json", {"cases": len(rows), "mismatches": len(bad), "tolerance": ORACLE_TOL})
    print(f"oracle: {len(rows)} cases, {len(bad)} mismatches")
    return EXIT_NUMERICAL if bad else EXIT_OK


def _finite_or_none(v: float):
    return v if math.isfinite(v) else ("inf" if v > 0 else "-inf")


def cmd_kernels(run: Optional[_Run]) -> int:
    listing = []
    for k in builtin_kernels():
        entry = {**kernel_to_dict(k), "is_difference": k.is_difference}
        if k.is_difference:
            entry.update(
                kappa_zero=_finite_or_none(k.kappa_zero()),
                kappa_infinity=_finite_or_none(k.kappa_infinity()),
                monotone=k.is_monotone(),
                changes_sign=k.changes_sign(),
            )
        listing.append(entry)
    text = json.dumps({"kernels": listing}, sort_keys=True, indent=2)
    print(text)
    if run is not None:
        run.json("kernels.json", {"kernels": listing})
    return EXIT_OK


_COMMANDS = {
    "scan": cmd_scan,
    "flvr": cmd_flvr,
    "converge": cmd_converge,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON experiment config")
    common.add_argument("--out", type=Path, default=None, help="output directory (default ./freelunch-out)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, default=1, help="worker threads over scan points")
    parser = argparse.ArgumentParser(prog="freelunch", description="Arbitrage scans for discretised moving-average noise markets.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "scan": "search for wait-buy-sell arbitrage over the grid",
        "flvr": "downside-to-mean ratio scan (free lunch with vanishing risk)",
        "converge": "discrete covariance versus quadrature limit",
        "simulate": "seeded noise and price paths",
        "oracle": "exhaustive enumeration check of lambda_bar",
        "kernels": "list built-in kernel families",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv: Optional[Iterable[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(None if argv is None else list(argv))
    try:
        if args.command != "kernels" and args.config is None:
            raise ConfigError(f"{args.command} needs --config")
        cfg = None
        if args.config is not None:
            cfg = load_config(args.config).with_seed(args.seed)
        out = args.out
        if args.command == "kernels":
            return cmd_kernels(None if out is None else _Run(cfg, out, args.threads))
        run = _Run(cfg, out or Path("freelunch-out"), args.threads)
        return _COMMANDS[args.command](run)
    except HypothesisViolated as exc:
        print(f"error: hypothesis '{exc.hypothesis}' violated: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DomainError, EnumerationTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
