"""Write the datasets behind the eight thermal-function plots.

KG on [0.1, 2], strong-field Dirac on [0.05, 3] for a in {1, 0.5, 0.1}.
One CSV per model and engine, plus plotdat files per quantity.

    python3 scripts/make_figure_data.py --out figures --count 200
"""
import argparse
from pathlib import Path

from relthermo.sweepcli import main

RUNS = {
    "kg": ["--model", "kg-linear", "--mubar", "0.1:2:{n}"],
    "dirac": ["--model", "dirac-strong", "--a", "1,0.5,0.1", "--mubar", "0.05:3:{n}"],
}


def run(out: Path, count: int, engines: list[str]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name, template in RUNS.items():
        base = [t.format(n=count) for t in template]
        for engine in engines:
            extra = [] if engine == "default" else ["--engine", engine]
            code = main(base + extra + ["--out", str(out / f"{name}_{engine}.csv")])
            print(f"{name:5s} {engine:8s} csv exit={code}")
            for q in ("lnZ", "F", "U", "S", "C"):
                main(base + extra + ["--format", "plotdat", "--quantity", q,
                                     "--out", str(out / f"{name}_{engine}_{q}.dat")])


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("figures"))
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--engines", default="default,direct")
    args = p.parse_args()
    run(args.out, args.count, args.engines.split(","))
