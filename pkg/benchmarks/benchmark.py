#!/usr/bin/env python
"""
Benchmark script for costbisim comparing decision procedures across model families.

This script builds wireless channel chains of growing length and random automata,
times every relation/cost-mode pair on them, counts the LPs and pivots they need,
and produces tables and graphs comparing results.
"""

import argparse
import gc
import os
import random
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

# Try to import visualization dependencies
try:
    import matplotlib.pyplot as plt
    import pandas as pd
    import seaborn as sns

    HAS_PLOTTING = True
except ImportError:
    HAS_PLOTTING = False
    print(
        "Warning: matplotlib, pandas, or seaborn not found. Visualizations will be skipped."
    )

try:
    sys.path.append(os.path.join(os.path.dirname(__file__), ".."))
    import costbisim
    from costbisim import CPA, Alphabet, CostMode, Distribution, Relation, Transition, dirac
    from costbisim.exceptions import CostBisimError
except ImportError:
    print("Error: costbisim package not found. Please install it first.")
    sys.exit(1)

# Relation/cost-mode pairs, plain weak bisimilarity first as the baseline
DECISIONS = [
    (Relation.WEAK_PROB, CostMode.PLAIN),
    (Relation.WEAK_PROB, CostMode.PRESERVING),
    (Relation.WEAK_PROB, CostMode.MINOR),
    (Relation.STRONG_PROB, CostMode.PLAIN),
    (Relation.STRONG_PROB, CostMode.MINOR),
    (Relation.STRONG, CostMode.PLAIN),
]


def decision_name(relation: Relation, mode: CostMode) -> str:
    return relation.value if mode is CostMode.PLAIN else f"{relation.value}/{mode.value}"


@dataclass
class BenchmarkResult:
    """Stores benchmark results for a specific decision and model pair."""

    decision: str
    dataset: str
    states: int
    seconds: float
    lps_solved: int
    pivots: int
    holds: bool

    @property
    def lps_per_second(self) -> float:
        """LP solves per second."""
        return self.lps_solved / self.seconds if self.seconds > 0 else 0

    @property
    def pivots_per_lp(self) -> float:
        """Average simplex pivots per LP."""
        return self.pivots / self.lps_solved if self.lps_solved else 0


def wireless_chain(n: int, distance: int, name: str) -> CPA:
    """Channel of ``n`` lossy hops, each costing distance² and succeeding with 1/2."""
    hops = [f"h{i}" for i in range(n + 1)]
    half = Fraction(1, 2)
    transitions = [Transition("s", "send", dirac(hops[0]), 1)]
    for i in range(n):
        transitions.append(
            Transition(hops[i], "hop", Distribution({hops[i + 1]: half, hops[i]: half}), distance**2)
        )
    transitions.append(Transition(hops[n], "recv", dirac("s"), 1))
    return CPA(name, ["s"] + hops, "s", Alphabet(("send", "recv"), ("hop",)), transitions)


def random_model(rng: random.Random, states: int, name: str) -> CPA:
    """Random automaton with about two transitions per state."""
    ids = [f"x{i}" for i in range(states)]
    transitions = []
    for s in ids:
        for _ in range(2):
            support = rng.sample(ids, min(2, states))
            weight = Fraction(rng.randint(1, 3), 4)
            target = Distribution({support[0]: weight, support[-1]: 1 - weight}) if len(support) > 1 else dirac(support[0])
            action = rng.choice(["a", "b", "step"])
            transitions.append(Transition(s, action, target, rng.randint(0, 5)))
    return CPA(name, ids, "x0", Alphabet(("a", "b"), ("step",)), transitions)


def build_datasets(max_hops: int, random_states: int, seed: int) -> Dict[str, Tuple[CPA, CPA]]:
    """Model pairs by dataset name: (cheap, expensive)."""
    datasets = {}
    for n in range(2, max_hops + 1):
        datasets[f"WCC {n + 1} vs {n}"] = (
            wireless_chain(n + 1, n, "Short"),
            wireless_chain(n, n + 1, "Long"),
        )
    rng = random.Random(seed)
    datasets[f"Random {random_states}"] = (
        random_model(rng, random_states, "R1"),
        random_model(rng, random_states, "R2"),
    )
    return datasets


def benchmark_decision(
    relation: Relation, mode: CostMode, pair: Tuple[CPA, CPA], dataset_name: str
) -> BenchmarkResult:
    """Time one decision on one model pair."""
    cheap, expensive = pair
    gc.collect()

    start_time = time.perf_counter()
    verdict = costbisim.decide(cheap, expensive, relation, mode)
    seconds = time.perf_counter() - start_time

    return BenchmarkResult(
        decision=decision_name(relation, mode),
        dataset=dataset_name,
        states=len(cheap.states) + len(expensive.states),
        seconds=seconds,
        lps_solved=verdict.stats.lps_solved,
        pivots=verdict.stats.pivots,
        holds=verdict.holds,
    )


def run_benchmarks(
    datasets: Dict[str, Tuple[CPA, CPA]], repetitions: int = 3
) -> List[BenchmarkResult]:
    """Run every decision on every dataset."""
    results = []

    for dataset_name, pair in datasets.items():
        for relation, mode in DECISIONS:
            name = decision_name(relation, mode)
            print(f"Benchmarking {name} on {dataset_name}...")

            runs = []
            for i in range(repetitions):
                print(f"  Repetition {i + 1}/{repetitions}...")
                try:
                    runs.append(benchmark_decision(relation, mode, pair, dataset_name))
                except CostBisimError as e:
                    print(f"  Error during benchmark: {e}")
                    continue

            if not runs:
                print(f"  No valid results for {name} on {dataset_name}")
                continue

            avg_result = BenchmarkResult(
                decision=name,
                dataset=dataset_name,
                states=runs[0].states,
                seconds=sum(r.seconds for r in runs) / len(runs),
                lps_solved=runs[0].lps_solved,
                pivots=runs[0].pivots,
                holds=runs[0].holds,
            )
            results.append(avg_result)
            print(
                f"  Results: {avg_result.seconds * 1000:.1f} ms, {avg_result.lps_solved} LPs, "
                f"{avg_result.pivots_per_lp:.1f} pivots/LP, holds={avg_result.holds}"
            )

    return results


def _table(
    title: str,
    results: List[BenchmarkResult],
    datasets: List[str],
    cell: Callable[[BenchmarkResult], str],
) -> None:
    by_key = {(r.decision, r.dataset): r for r in results}
    print(f"\n{title}:")
    print("-" * 100)
    header = "Decision".ljust(24)
    for dataset in datasets:
        header += f"{dataset[:16].ljust(18)}"
    print(header)
    print("-" * 100)

    for relation, mode in DECISIONS:
        name = decision_name(relation, mode)
        line = name.ljust(24)
        for dataset in datasets:
            r = by_key.get((name, dataset))
            line += (cell(r) if r else "N/A").ljust(18)
        print(line)


def print_tables(results: List[BenchmarkResult]):
    """Print formatted tables of benchmark results."""
    datasets = list(dict.fromkeys(r.dataset for r in results))
    _table("Decision Time (ms)", results, datasets, lambda r: f"{r.seconds * 1000:.1f}")
    _table("LPs Solved", results, datasets, lambda r: str(r.lps_solved))
    _table("Verdict", results, datasets, lambda r: "holds" if r.holds else "fails")


def create_visualizations(results: List[BenchmarkResult], output_dir: str):
    """Create and save visualizations if plotting libraries are available."""
    if not HAS_PLOTTING:
        print("Skipping visualizations due to missing dependencies.")
        return

    os.makedirs(output_dir, exist_ok=True)

    df = pd.DataFrame(
        [
            {
                "Decision": r.decision,
                "Dataset": r.dataset,
                "States": r.states,
                "Time (ms)": r.seconds * 1000,
                "LPs": r.lps_solved,
                "Pivots per LP": r.pivots_per_lp,
            }
            for r in results
        ]
    )

    sns.set_style("whitegrid")
    plt.rcParams["figure.figsize"] = (14, 10)

    for metric, outfile in [
        ("Time (ms)", "decision_time.png"),
        ("LPs", "lps_solved.png"),
        ("Pivots per LP", "pivots_per_lp.png"),
    ]:
        plt.figure()
        sns.barplot(data=df, x="Dataset", y=metric, hue="Decision")
        plt.title(f"{metric} by Decision")
        plt.xticks(rotation=0)
        plt.legend(title="Decision", bbox_to_anchor=(1.05, 1), loc="upper left")
        plt.tight_layout()
        plt.savefig(os.path.join(output_dir, outfile), dpi=300)
        plt.close()

    chains = df[df["Dataset"].str.startswith("WCC")]
    if not chains.empty:
        plt.figure()
        sns.lineplot(data=chains, x="States", y="Time (ms)", hue="Decision", marker="o")
        plt.title("Decision Time on Growing Channels")
        plt.tight_layout()
        plt.savefig(os.path.join(output_dir, "scaling.png"), dpi=300)
        plt.close()

    df.to_csv(os.path.join(output_dir, "benchmark_results.csv"), index=False)

    print(f"Visualizations and data saved to {output_dir}")


def main():
    """Main function to run the benchmarks."""
    file_path = os.path.dirname(os.path.abspath(__file__))

    print(f"Running benchmarks from: {file_path}")
    parser = argparse.ArgumentParser(
        description="Benchmark costbisim decision procedures"
    )
    parser.add_argument(
        "--max-hops",
        type=int,
        default=5,
        help="Longest channel of the wireless chain family",
    )
    parser.add_argument(
        "--random-states",
        type=int,
        default=6,
        help="States per random automaton",
    )
    parser.add_argument("--seed", type=int, default=7, help="Seed of the random models")
    parser.add_argument(
        "--repetitions",
        type=int,
        default=3,
        help="Number of repetitions for more reliable results",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="Worker threads for LP checks (0 = auto)",
    )
    parser.add_argument(
        "--output",
        type=str,
        default=os.path.join(file_path, "results"),
        help="Output directory for visualizations",
    )

    args = parser.parse_args()
    costbisim.configure(threads=args.threads)
    datasets = build_datasets(args.max_hops, args.random_states, args.seed)

    print("Running costbisim benchmarks")
    print(f"- Repetitions: {args.repetitions}")
    print(f"- Threads: {args.threads}")
    print(f"- Testing decisions: {', '.join(decision_name(r, m) for r, m in DECISIONS)}")
    print(f"- Testing datasets: {', '.join(datasets)}")

    results = run_benchmarks(datasets, repetitions=args.repetitions)

    print_tables(results)

    create_visualizations(results, args.output)

    print("\nBenchmarks complete!")


if __name__ == "__main__":
    main()
