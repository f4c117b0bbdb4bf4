"""Nominal vs overloaded switch: delay of the high class on port 0.

    python3 scripts/load_experiment.py [--out results/load]

Writes the trace directories of both runs and one SVG per run.
"""
import argparse
from pathlib import Path

from ncswitch import scenario as scn
from ncswitch.simulation import run
from ncswitch.trace import export_csv, plot, summary, write_meta

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "ncswitch" / "scenarios"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/load")
    args = ap.parse_args()
    out = Path(args.out)
    for name in ("baseline", "congested"):
        sc = scn.load(SCENARIOS / f"{name}.json")
        trace, sim = run(sc)
        d = out / name
        d.mkdir(parents=True, exist_ok=True)
        export_csv(trace, d)
        write_meta(trace, d)
        high = summary(trace, 3)
        print(f"{name:10s} {high.describe(sc.tick_scale)}")
        plot(trace, 3, out / f"{name}_high.svg", title=f"{name}: high class")


if __name__ == "__main__":
    main()
