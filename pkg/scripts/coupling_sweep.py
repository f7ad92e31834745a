"""Ion-circuit coupling rate along an eta sweep up to the stability boundary.

The closed-form small-drive estimate is written next to the Floquet value.
"""

import argparse
import warnings
from dataclasses import asdict, dataclass

import numpy as np

from ionsquid.coupling import SWEEP_COLUMNS, perturbative_coupling, sweep_eta
from ionsquid.errors import NearResonanceWarning
from ionsquid.io import write_csv
from ionsquid.params import paper_params
from ionsquid.stability import boundary_eta


@dataclass
class Config:
    n: int = 40
    n_samples: int = 1024
    threads: int = 1
    out: str = "out/coupling"


def run(cfg: Config):
    p = paper_params()
    s = p.derived.omega_i / p.derived.omega_0
    edge = boundary_eta(s)
    etas = np.linspace(0, edge, cfg.n + 1)[:-1]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearResonanceWarning)
        rows = sweep_eta(p, etas, n_samples=cfg.n_samples, threads=cfg.threads)
    closed = [perturbative_coupling(p.with_drive(eta=float(e)))[0] for e in etas]
    rows = [(*row, est) for row, est in zip(rows, closed)]
    write_csv(f"{cfg.out}/sweep.csv", (*SWEEP_COLUMNS, "Omega_closed_form"), rows, metadata={"config": asdict(cfg)})
    print(f"{len(rows)} points, eta up to {etas[-1]:.5f} (boundary {edge:.5f})")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=Config.n)
    ap.add_argument("--n-samples", type=int, default=Config.n_samples)
    ap.add_argument("--threads", type=int, default=Config.threads)
    ap.add_argument("--out", default=Config.out)
    run(Config(**vars(ap.parse_args())))
