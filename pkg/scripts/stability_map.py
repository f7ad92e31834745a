"""Stability map of the driven circuit over (omega_i/omega_0, eta).

Writes the cell table and the bisected boundary for each ratio column.
"""

import argparse
import time
from dataclasses import asdict, dataclass

from ionsquid.io import write_csv
from ionsquid.stability import CSV_COLUMNS, GridSpec, boundary_eta, stability_map


@dataclass
class Config:
    n_ratio: int = 50
    n_eta: int = 50
    threads: int = 1
    out: str = "out/stability"


def run(cfg: Config):
    t0 = time.perf_counter()
    grid = GridSpec(n_ratio=cfg.n_ratio, n_eta=cfg.n_eta)
    m = stability_map(grid, threads=cfg.threads)
    write_csv(f"{cfg.out}/map.csv", CSV_COLUMNS, m.rows(), metadata={"config": asdict(cfg)})
    edge = m.boundary()
    rows = [(float(r), float(e), boundary_eta(float(r), tol=1e-6)) for r, e in zip(m.ratios, edge)]
    write_csv(f"{cfg.out}/boundary.csv", ("ratio", "grid_edge", "bisected"), rows)
    print(f"{int(m.stable.sum())}/{m.stable.size} stable cells in {time.perf_counter() - t0:.1f} s")
    return m


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n-ratio", type=int, default=Config.n_ratio)
    ap.add_argument("--n-eta", type=int, default=Config.n_eta)
    ap.add_argument("--threads", type=int, default=Config.threads)
    ap.add_argument("--out", default=Config.out)
    run(Config(**vars(ap.parse_args())))
