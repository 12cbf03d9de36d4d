"""Single-cluster laws against the closed-form quarter circle for several lambda."""

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from blockmarkov import io
from blockmarkov.limitlaw import law_density, support_edge
from blockmarkov.model import BlockModel


@dataclass
class QuarterCircleConfig:
    lams: list = field(default_factory=lambda: [0.5, 1.0, 2.7, 5.0])
    points: int = 2001
    epsilon: float = 1e-3
    out_dir: str = "results/quarter_circle"


def run(cfg: QuarterCircleConfig) -> list[dict]:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for lam in cfg.lams:
        model = BlockModel([[1.0]], [1.0], lam)
        for target, eff in (("N", lam), ("P", 1 / lam)):
            d = law_density(model, target, cfg.points, cfg.epsilon).fold()
            exact = np.sqrt(np.clip(4 * eff - d.grid**2, 0, None)) / (np.pi * eff)
            inside = d.grid <= 1.96 * np.sqrt(eff)
            io.write_rows(out / f"law_{target}_lambda{lam:g}.csv", ["x", "density", "exact"],
                          zip(d.grid, d.density, exact))
            rows.append({"lambda": lam, "target": target,
                         "linf_error": float(np.max(np.abs(d.density - exact)[inside])),
                         "mass": d.mass(), "support_edge": support_edge(d),
                         "exact_edge": float(2 * np.sqrt(eff))})
            print(json.dumps(rows[-1]))
    io.write_json(out / "summary.json", rows)
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lams", type=float, nargs="+", default=[0.5, 1.0, 2.7, 5.0])
    ap.add_argument("--points", type=int, default=2001)
    ap.add_argument("--epsilon", type=float, default=1e-3)
    ap.add_argument("--out-dir", default="results/quarter_circle")
    run(QuarterCircleConfig(**vars(ap.parse_args())))


if __name__ == "__main__":
    main()
