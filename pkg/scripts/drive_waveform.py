"""External flux needed for a pure-cosine loop flux, plus the round-trip check."""

import argparse
import math
from dataclasses import asdict, dataclass

from ionsquid.drive import WAVEFORM_COLUMNS, classical_solution, synthesize_flux, verify_roundtrip, waveform_rows
from ionsquid.io import write_csv
from ionsquid.params import paper_params


@dataclass
class Config:
    eta: float = 0.06
    beta: float = 0.08
    omega_d_over_omega_0: float = 0.999
    n_samples: int = 1024
    out: str = "out/drive"


def run(cfg: Config):
    p = paper_params()
    w0 = p.derived.omega_0
    d = classical_solution(cfg.eta, cfg.beta, cfg.omega_d_over_omega_0 * w0, n_samples=cfg.n_samples)
    d = synthesize_flux(d, w0)
    residual = verify_roundtrip(d, periods=10, tol=math.inf)
    rows = waveform_rows(d, p.circuit.C_sigma, p.circuit.phi0_tilde)
    write_csv(f"{cfg.out}/waveform.csv", WAVEFORM_COLUMNS, rows, metadata={"config": asdict(cfg)})
    print(f"phi_x range [{d.phi_x.min():.5f}, {d.phi_x.max():.5f}] phi0, round-trip residual {residual:.2e}")
    return d, residual


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eta", type=float, default=Config.eta)
    ap.add_argument("--beta", type=float, default=Config.beta)
    ap.add_argument("--omega-d-over-omega-0", type=float, default=Config.omega_d_over_omega_0)
    ap.add_argument("--n-samples", type=int, default=Config.n_samples)
    ap.add_argument("--out", default=Config.out)
    run(Config(**vars(ap.parse_args())))
