"""Time-domain energy exchange compared with the Floquet rate, over several ratios and drives."""

import argparse
from dataclasses import dataclass, field

from ionsquid.dynamics import default_kappa, rwa_validate
from ionsquid.io import write_csv
from ionsquid.stability import boundary_eta


@dataclass
class Config:
    ratios: list = field(default_factory=lambda: [0.02, 0.01])
    drive_fractions: list = field(default_factory=lambda: [1 / 16, 1 / 8, 1 / 4, 1 / 2])
    out: str = "out/exchange"


COLUMNS = ("ratio", "eta", "kappa", "Omega_measured", "Omega_predicted", "relative_error", "contrast")


def run(cfg: Config):
    rows = []
    for ratio in cfg.ratios:
        edge = boundary_eta(ratio, tol=1e-6)
        kappa = default_kappa(ratio, min(cfg.drive_fractions) * edge)
        for frac in cfg.drive_fractions:
            rep = rwa_validate(ratio, eta=frac * edge, kappa=kappa)
            rows.append(
                (ratio, rep.eta, rep.kappa, rep.Omega_measured, rep.Omega_predicted, rep.relative_error, rep.contrast)
            )
            print(f"r = {ratio:g}  eta = {rep.eta:.5f}  Omega = {rep.Omega_measured:.4e}  rel err {rep.relative_error:.1e}")
    write_csv(f"{cfg.out}/exchange.csv", COLUMNS, rows)
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ratios", type=float, nargs="+", default=Config().ratios)
    ap.add_argument("--out", default=Config.out)
    args = ap.parse_args()
    run(Config(ratios=args.ratios, out=args.out))
