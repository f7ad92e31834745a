"""Periodic part of the Floquet solution and its low sidebands for one (eta, omega_d)."""

import argparse
from dataclasses import asdict, dataclass

import numpy as np

from ionsquid.floquet import polar, solve_mathieu
from ionsquid.io import write_csv
from ionsquid.params import mathieu_AQ


@dataclass
class Config:
    eta: float = 0.06
    omega_d_over_omega_0: float = 0.999
    n_samples: int = 1024
    k_max: int = 4
    out: str = "out/floquet"


def run(cfg: Config):
    A, Q = mathieu_AQ(cfg.eta, cfg.omega_d_over_omega_0)
    sol = solve_mathieu(A, Q, n_samples=cfg.n_samples).natural()
    g = sol.periodic_part()
    pol = polar(sol)
    meta = {"config": asdict(cfg), "A": A, "Q": Q, "mu": sol.mu.real, "W": sol.W}
    rows = zip(sol.u, g.real, g.imag, pol.r, pol.theta)
    write_csv(f"{cfg.out}/periodic_part.csv", ("u", "re_g", "im_g", "r", "theta"), rows, metadata=meta)
    ks = range(-cfg.k_max, cfg.k_max + 1)
    c = [sol.coefficient(k) for k in ks]
    write_csv(f"{cfg.out}/sidebands.csv", ("k", "re_c", "im_c", "abs_c"), ((k, z.real, z.imag, abs(z)) for k, z in zip(ks, c)))
    print(f"A = {A:.6f}, Q = {Q:.6f}, mu = {sol.mu.real:.6f}, W = {sol.W:.6f}")
    for k, z in zip(ks, c):
        print(f"  c_{k:+d} = {abs(z):.3e}")
    return sol, np.array(c)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=Config.eta)
    ap.add_argument("--omega-d-over-omega-0", type=float, default=Config.omega_d_over_omega_0)
    ap.add_argument("--n-samples", type=int, default=Config.n_samples)
    ap.add_argument("--k-max", type=int, default=Config.k_max)
    ap.add_argument("--out", default=Config.out)
    run(Config(**vars(ap.parse_args())))
