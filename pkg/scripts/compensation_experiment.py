"""Detection and compensation under a transient burst, compensation on vs off.

    python3 scripts/compensation_experiment.py [--out results/compensation] [--cap 200]

Prints per-class statistics and the number of threshold violations per run,
and plots every class with the 80 T.U threshold line. Frames above ``--cap``
T.U are left off the plots and counted in an annotation.
"""
import argparse
from pathlib import Path

from ncswitch import scenario as scn
from ncswitch.simulation import run
from ncswitch.trace import EmptyClass, export_csv, plot, summary, write_meta

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "ncswitch" / "scenarios"
LABELS = {3: "high", 2: "mean", 1: "low"}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results/compensation")
    ap.add_argument("--cap", type=int, default=200, help="plot cap in T.U")
    args = ap.parse_args()
    out = Path(args.out)
    base = scn.load(SCENARIOS / "fdi_ftc.json")
    for ftc in (False, True):
        sc, diags = scn.parse(scn.with_overrides(base.raw, ftc=ftc))
        assert not diags, diags
        trace, sim = run(sc)
        tag = "ftc_on" if ftc else "ftc_off"
        d = out / tag
        d.mkdir(parents=True, exist_ok=True)
        export_csv(trace, d)
        write_meta(trace, d)
        print(f"-- {tag}: {len(trace.faults)} faults, {len(trace.decisions)} compensation changes")
        for cls, label in LABELS.items():
            try:
                print("   " + summary(trace, cls).describe(sc.tick_scale))
            except EmptyClass:
                continue
            plot(trace, cls, out / f"{tag}_{label}.svg", cap=args.cap * sc.tick_scale,
                 title=f"{label} class, compensation {'on' if ftc else 'off'}")


if __name__ == "__main__":
    main()
