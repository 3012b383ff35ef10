"""Experiment configuration, the sweep driver, and result serialization.

The driver enumerates and prunes candidates once, then for each
regularization weight optimizes the activation distribution, simulates
the resulting scheme, and writes one CSV trace per weight plus a JSON
summary. Outputs are byte-identical across runs of the same config.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .candidates import enumerate_candidates, prune_dominated
from .energy import EnergyParams, candidate_cost_l1
from .errors import ConfigurationError
from .optimizer import OptimizerOptions, optimize
from .simulator import AveragedTrace, SimulationScenario, monte_carlo
from .topology import Topology, generate_topology, load_topology

__all__ = [
    "ExperimentConfig",
    "load_config",
    "config_from_dict",
    "run_sweep",
    "write_trace_csv",
    "write_summary_json",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG_ERROR = 1
EXIT_INFEASIBLE = 2
EXIT_IO_ERROR = 3

SUPPORT_FLOOR = 1e-6


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep's worth of settings; defaults give a 30-node demo field."""

    n_nodes: int = 30
    area_side: float = 50.0
    topology_seed: int = 7
    topology_file: str | None = None
    cluster_size_min: int = 2
    cluster_size_max: int | None = None
    alphas: tuple[float, ...] = (0.0, 4e-5, 8e-5)
    epsilon: float = 1e-2
    runs: int = 1000
    error_threshold: float = 0.1
    max_iterations: int = 10000
    sim_base_seed: int = 1000
    eps_amp: float = 1.0
    e_elec: float = 0.0
    k_bits: float = 1.0
    init_low: float = 0.0
    init_high: float = 30.0
    output_dir: str = "results"

    def size_max(self) -> int:
        return self.n_nodes if self.cluster_size_max is None else self.cluster_size_max


_CONFIG_KEYS = set(ExperimentConfig.__dataclass_fields__)


def config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build and validate a config from a plain dict of overrides."""
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigurationError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "alphas" in data:
        data = {**data, "alphas": tuple(data["alphas"])}
    config = ExperimentConfig(**data)
    _validate(config)
    return config


def _validate(config: ExperimentConfig) -> None:
    def fail(key: str, message: str) -> None:
        raise ConfigurationError(f"config key '{key}': {message}")

    if config.n_nodes < 2:
        fail("n_nodes", f"must be >= 2, got {config.n_nodes}")
    if config.area_side <= 0:
        fail("area_side", f"must be positive, got {config.area_side}")
    if config.cluster_size_min < 2:
        fail("cluster_size_min", f"must be >= 2, got {config.cluster_size_min}")
    if config.size_max() < config.cluster_size_min:
        fail(
            "cluster_size_max",
            f"must be >= cluster_size_min, got {config.size_max()}",
        )
    if config.topology_file is None and config.size_max() > config.n_nodes:
        fail("cluster_size_max", f"must be <= n_nodes, got {config.size_max()}")
    if len(config.alphas) == 0:
        fail("alphas", "must be a nonempty list")
    if any(a < 0 for a in config.alphas):
        fail("alphas", f"must all be >= 0, got {list(config.alphas)}")
    if not 0 < config.epsilon < 1:
        fail("epsilon", f"must lie in (0, 1), got {config.epsilon}")
    if config.runs < 1:
        fail("runs", f"must be >= 1, got {config.runs}")
    if config.error_threshold <= 0:
        fail("error_threshold", f"must be positive, got {config.error_threshold}")
    if config.max_iterations < 1:
        fail("max_iterations", f"must be >= 1, got {config.max_iterations}")
    for key in ("eps_amp", "e_elec", "k_bits"):
        if getattr(config, key) < 0:
            fail(key, f"must be >= 0, got {getattr(config, key)}")
    if config.init_low > config.init_high:
        fail("init_low", f"must be <= init_high, got {config.init_low}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Load a JSON config file; unspecified keys take the defaults."""
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {p}")
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config file {p} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {p} must contain a JSON object")
    return config_from_dict(data)


def _fmt(x: float) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(x))


def write_trace_csv(averaged_trace: AveragedTrace, alpha: float, path: Path) -> None:
    """Write one averaged trace as CSV, one row per iteration."""
    lines = ["alpha,iteration,mean_error,mean_energy"]
    for t in range(averaged_trace.mean_errors.size):
        lines.append(
            f"{_fmt(alpha)},{t},{_fmt(averaged_trace.mean_errors[t])},"
            f"{_fmt(averaged_trace.mean_energies[t])}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_summary_json(results: list[dict[str, Any]], path: Path) -> None:
    """Write the per-alpha summary array."""
    path.write_text(json.dumps(results, indent=2) + "\n", encoding="utf-8")


def _build_topology(config: ExperimentConfig) -> Topology:
    if config.topology_file is not None:
        topology = load_topology(config.topology_file)
        if config.size_max() > topology.n:
            raise ConfigurationError(
                f"config key 'cluster_size_max': must be <= number of nodes in "
                f"topology file ({topology.n}), got {config.size_max()}"
            )
        return topology
    return generate_topology(config.n_nodes, config.area_side, config.topology_seed)


def run_sweep(config: ExperimentConfig) -> int:
    """Run the full alpha sweep; returns the process exit code."""
    topology = _build_topology(config)
    params = EnergyParams(
        eps_amp=config.eps_amp, e_elec=config.e_elec, k_bits=config.k_bits
    )

    enumerated = enumerate_candidates(
        topology, config.cluster_size_min, config.size_max()
    )
    all_costs = [candidate_cost_l1(c, topology, params) for c in enumerated]
    kept = prune_dominated(enumerated, all_costs)
    costs = np.array([candidate_cost_l1(c, topology, params) for c in kept])

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    summary: list[dict[str, Any]] = []
    any_infeasible = False
    for alpha in config.alphas:
        options = OptimizerOptions(alpha=alpha, epsilon=config.epsilon)
        result = optimize(kept, costs, topology.n, options)

        entry: dict[str, Any] = {
            "alpha": float(alpha),
            "feasible": result.feasible,
            "xi": result.xi,
            "objective": result.objective,
            "expected_cost_l1": result.expected_cost_l1,
            "support": _support(result.p, kept),
            "mean_iterations_to_threshold": None,
            "mean_energy_at_threshold": None,
        }
        if result.feasible:
            scenario = SimulationScenario(
                candidates=tuple(kept),
                costs_l1=costs,
                p=result.p,
                n=topology.n,
                init_low=config.init_low,
                init_high=config.init_high,
                threshold=config.error_threshold,
                max_iters=config.max_iterations,
            )
            averaged = monte_carlo(scenario, config.runs, config.sim_base_seed)
            write_trace_csv(averaged, alpha, out_dir / f"trace_alpha={_fmt(alpha)}.csv")
            entry["mean_iterations_to_threshold"] = averaged.mean_iterations_to_threshold
            entry["mean_energy_at_threshold"] = averaged.mean_energy_at_threshold
        else:
            any_infeasible = True
            entry["support"] = []
        summary.append(entry)

    write_summary_json(summary, out_dir / "summary.json")
    return EXIT_INFEASIBLE if any_infeasible else EXIT_OK


def _support(p: np.ndarray, kept: Sequence[Any]) -> list[dict[str, Any]]:
    rows = [
        {
            "head": cand.head,
            "members": list(cand.members),
            "probability": float(prob),
        }
        for prob, cand in zip(p, kept)
        if prob > SUPPORT_FLOOR
    ]
    rows.sort(key=lambda r: (-r["probability"], r["head"], r["members"]))
    return rows


def _cmd_run(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.output_dir is not None:
        config = replace(config, output_dir=args.output_dir)
    if args.seed is not None:
        config = replace(config, sim_base_seed=args.seed)
    return run_sweep(config)


def _cmd_validate(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    print(f"config OK: {args.config} ({len(config.alphas)} alpha value(s))")
    return EXIT_OK


def _cmd_candidates(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    topology = _build_topology(config)
    params = EnergyParams(
        eps_amp=config.eps_amp, e_elec=config.e_elec, k_bits=config.k_bits
    )
    enumerated = enumerate_candidates(
        topology, config.cluster_size_min, config.size_max()
    )
    all_costs = [candidate_cost_l1(c, topology, params) for c in enumerated]
    kept = {id(c) for c in prune_dominated(enumerated, all_costs)}

    print(f"{'kept':>4}  {'head':>4}  {'size':>4}  {'cost_l1':>12}  members")
    for cand, cost in zip(enumerated, all_costs):
        mark = "*" if id(cand) in kept else ""
        print(f"{mark:>4}  {cand.head:>4}  {cand.size:>4}  {cost:>12.4f}  {list(cand.members)}")
    print(f"{len(enumerated)} enumerated, {len(kept)} kept")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clustergossip",
        description="Energy-aware cluster activation for randomized average consensus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run the full alpha sweep and write outputs")
    run_p.add_argument("--config", required=True, help="path to JSON config")
    run_p.add_argument("--output-dir", default=None, help="override output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override sim_base_seed")

    val_p = sub.add_parser("validate", help="parse and constraint-check a config")
    val_p.add_argument("--config", required=True, help="path to JSON config")

    cand_p = sub.add_parser("candidates", help="print the candidate table")
    cand_p.add_argument("--config", required=True, help="path to JSON config")

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "validate": _cmd_validate,
        "candidates": _cmd_candidates,
    }
    try:
        return handlers[args.command](args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO_ERROR


def entrypoint() -> None:
    raise SystemExit(main())
