"""Simulate the three-cluster chain at n=1000, ell=2n^2 and compare the
singular values of N/sqrt(n), sqrt(n) P, M/sqrt(n) and sqrt(n) Q with the
limiting laws. Writes spectra, densities and a KS summary to --out-dir."""

import argparse
import json
import math
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from blockmarkov import io
from blockmarkov.limitlaw import law_cdf, law_density, support_edge
from blockmarkov.matrices import centered, expected_frequency, q_transform, transition_matrix
from blockmarkov.model import BlockModel, build_layout
from blockmarkov.sampler import Equilibrium, stream_edge_counts
from blockmarkov.spectra import esd_scaled, ks_distance, ks_two_sample, singular_values, trim_top


@dataclass
class SpectraConfig:
    n: int = 1000
    ell_coef: float = 2.0
    seed: int = 2022
    trim: int = 3
    points: int = 2001
    out_dir: str = "results/three_cluster"


P = [[0.9, 0.1, 0.0], [0.0, 0.1, 0.9], [0.3, 0.7, 0.0]]
ALPHA = [0.5, 0.4, 0.1]


def run(cfg: SpectraConfig) -> dict:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model = BlockModel(P, ALPHA, cfg.ell_coef)
    layout = build_layout(model, cfg.n)
    ell = int(round(cfg.ell_coef * cfg.n**2))
    t0 = time.perf_counter()
    counts = stream_edge_counts(model, layout, ell, Equilibrium(), cfg.seed)
    M = centered(counts, expected_frequency(model, layout, ell))
    root = math.sqrt(cfg.n)
    spectra = {
        "nhat": esd_scaled(singular_values(counts.dense()), root),
        "phat": esd_scaled(singular_values(transition_matrix(counts).toarray()), 1 / root),
        "m": esd_scaled(singular_values(M), root),
        "q": esd_scaled(singular_values(q_transform(M, model, layout, ell)), 1 / root),
    }
    laws = {"N": law_density(model, "N", cfg.points), "P": law_density(model, "P", cfg.points)}
    for name, dist in spectra.items():
        io.write_spectrum(out / f"spectrum_{name}.csv", dist.points[::-1])
    for name, dens in laws.items():
        io.write_density(out / f"law_{name}.csv", dens.fold())

    summary = {"config": asdict(cfg), "ell": ell, "seconds": None, "top_singular_values": {}}
    for name, target in (("nhat", "N"), ("phat", "P"), ("m", "N"), ("q", "P")):
        cdf = law_cdf(laws[target])
        summary[f"ks_{name}_trimmed"] = ks_distance(trim_top(spectra[name], cfg.trim), cdf)
        summary[f"ks_{name}_untrimmed"] = ks_distance(spectra[name], cdf)
        summary["top_singular_values"][name] = spectra[name].points[::-1][: cfg.trim + 1].tolist()
    summary["ks_m_vs_nhat"] = ks_two_sample(trim_top(spectra["m"], cfg.trim), trim_top(spectra["nhat"], cfg.trim))
    summary["ks_q_vs_phat"] = ks_two_sample(trim_top(spectra["q"], cfg.trim), trim_top(spectra["phat"], cfg.trim))
    summary["support_edge"] = {k: support_edge(v) for k, v in laws.items()}
    summary["seconds"] = time.perf_counter() - t0
    io.write_json(out / "summary.json", summary)
    return summary


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    for name, default in asdict(SpectraConfig()).items():
        ap.add_argument("--" + name.replace("_", "-"), type=type(default), default=default)
    cfg = SpectraConfig(**vars(ap.parse_args()))
    print(json.dumps(run(cfg), indent=2))


if __name__ == "__main__":
    main()
