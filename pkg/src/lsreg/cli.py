"""Command line entry point: ``lsreg {forward,invert,sweep,selftest}``."""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .harness import io
from .harness.experiment import (
    ExperimentSpec,
    add_noise,
    generate_data,
    initial_level_set,
    resolve_beta,
    run_experiment,
    support_difference,
    true_support,
)
from .projection import ProjectionParams, project_smooth
from .harness.presets import PRESETS, get_preset

logger = logging.getLogger("lsreg")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lsreg", description="Level set reconstruction of a binary source from Neumann data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--spec", type=Path, help="experiment TOML file")
        src.add_argument("--preset", choices=sorted(PRESETS))
        sp.add_argument("--seed", type=int, help="override the noise / run seed")
        sp.add_argument("--out", type=Path, help="output directory")

    common(sub.add_parser("forward", help="generate boundary data for an experiment"))
    inv = sub.add_parser("invert", help="run a full reconstruction")
    common(inv)
    inv.add_argument("--data", type=Path, help="noisy trace CSV (skips data generation)")
    inv.add_argument("--max-iterations", type=int)

    sw = sub.add_parser("sweep", help="grid of beta*alpha / alpha / epsilon values")
    common(sw)
    sw.add_argument("--beta-alpha", default="0,fit,10fit",
                    help="comma list of numbers or '<k>fit' multiples of the fit-to-data value")
    sw.add_argument("--alpha", default=None, help="comma list of alpha values")
    sw.add_argument("--epsilon", default=None, help="comma list of epsilon values")
    sw.add_argument("--max-iterations", type=int)
    sw.add_argument("--jobs", type=int, default=1)

    sub.add_parser("selftest", help="run the quick property checks")
    return p


def _load(args: argparse.Namespace) -> ExperimentSpec:
    spec = get_preset(args.preset) if args.preset else ExperimentSpec.load(args.spec)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed, reconstruction=replace(spec.reconstruction, seed=args.seed))
    if getattr(args, "max_iterations", None) is not None:
        spec = spec.with_overrides(max_iterations=args.max_iterations)
    if args.out is not None:
        spec = replace(spec, output_dir=str(args.out))
    return spec


def cmd_forward(spec: ExperimentSpec) -> int:
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = spec.inversion_grid()
    clean = generate_data(spec)
    noisy = add_noise(clean, spec.noise_level, spec.seed)
    cfg = resolve_beta(spec, grid, initial_level_set(spec, grid), noisy)
    resolved = replace(spec, reconstruction=cfg, beta_rule="fixed", beta_scale=1.0)
    io.write_trace(out / "data.csv", grid, clean)
    io.write_trace(out / "data_noisy.csv", grid, noisy)
    (out / "spec.resolved.toml").write_text(resolved.to_toml())
    print(f"wrote data for {spec.name} to {out}")
    return 0


def cmd_invert(spec: ExperimentSpec, data: Path | None) -> int:
    noisy = io.read_trace(data, spec.inversion_grid()) if data is not None else None
    outcome = run_experiment(spec, data_noisy=noisy)
    print(json.dumps(outcome.summary, indent=2))
    return outcome.status


def _parse_list(text: str | None, default: float) -> list[float]:
    if text is None:
        return [default]
    return [float(t) for t in text.split(",") if t.strip()]


def _beta_variants(text: str) -> list[tuple[str, str, float]]:
    """``"0,fit,10fit"`` -> ``[("0", "fixed", 0.0), ("fit", "fit", 1.0), ("10fit", "fit", 10.0)]``."""
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        if tok.endswith("fit"):
            scale = float(tok[:-3]) if tok[:-3] else 1.0
            out.append((tok, "fit", scale))
        else:
            out.append((tok, "fixed", float(tok)))
    return out


def _sweep_job(job: tuple[ExperimentSpec, str, float | None]) -> dict:
    spec, label, fixed_ba = job
    if fixed_ba is not None:
        spec = replace(spec, reconstruction=spec.reconstruction.with_beta_alpha(fixed_ba))
    outcome = run_experiment(spec)
    row = {"label": label, **outcome.summary, "exit_status": outcome.status}
    if outcome.result is not None:
        np.save(Path(spec.output_dir) / "phi_final.npy", outcome.result.phi)
    return row


def sweep_jobs(spec: ExperimentSpec, beta_alpha: str, alphas: list[float], epsilons: list[float]):
    root = Path(spec.output_dir)
    jobs = []
    for (tag, rule, value), a, e in itertools.product(_beta_variants(beta_alpha), alphas, epsilons):
        label = f"ba={tag}_alpha={a:g}_eps={e:g}"
        sub = spec.with_overrides(alpha=a, epsilon=e, output_dir=str(root / label))
        if rule == "fit":
            sub = replace(sub, beta_rule="fit", beta_scale=value)
            jobs.append((sub, label, None))
        else:
            jobs.append((replace(sub, beta_rule="fixed"), label, value))
    return jobs


def write_pairwise(spec: ExperimentSpec, root: Path, jobs) -> None:
    """``pairwise.csv``: support difference between every two finished runs,
    relative to the true support area."""
    grid = spec.inversion_grid()
    truth = true_support(spec, grid)
    finals = {}
    for sub, label, _ in jobs:
        path = Path(sub.output_dir) / "phi_final.npy"
        if path.exists():
            eps = sub.reconstruction.epsilon
            finals[label] = project_smooth(np.load(path), ProjectionParams(epsilon=eps))
    with open(root / "pairwise.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["run_a", "run_b", "support_difference"])
        for a, b in itertools.combinations(finals, 2):
            w.writerow([a, b, repr(support_difference(grid, finals[a], finals[b], truth))])


def cmd_sweep(spec: ExperimentSpec, args: argparse.Namespace) -> int:
    jobs = sweep_jobs(
        spec,
        args.beta_alpha,
        _parse_list(args.alpha, spec.reconstruction.alpha),
        _parse_list(args.epsilon, spec.reconstruction.epsilon),
    )
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_job, jobs))
    else:
        rows = [_sweep_job(j) for j in jobs]
    root = Path(spec.output_dir)
    root.mkdir(parents=True, exist_ok=True)
    keys = ["label", "exit_status", "status", "beta_alpha", "iterations", "final_component_count",
            "final_residual_sq", "symmetric_difference"]
    with open(root / "sweep.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    write_pairwise(spec, root, jobs)
    for r in rows:
        print(f"{r['label']}: status={r.get('status')} components={r.get('final_component_count')} "
              f"symdiff={r.get('symmetric_difference')}")
    return max((r["exit_status"] for r in rows), default=0)


def cmd_selftest() -> int:
    from . import checks

    failed = 0
    for name, ok, detail in checks.run_all():
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += not ok
    return 1 if failed else 0


def main(argv: list[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "selftest":
        return cmd_selftest()
    try:
        spec = _load(args)
    except (OSError, ValueError, TypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"lsreg: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "forward":
            return cmd_forward(spec)
        if args.command == "invert":
            return cmd_invert(spec, args.data)
        return cmd_sweep(spec, args)
    except OSError as exc:
        print(f"lsreg: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
