"""Error probability of each receiver across signal strengths.

Sweeps the mean photon number and tabulates the error probability of the
quantum bound, the nulling receiver, the optimized fixed displacement and
the optimized constant-envelope feedback receiver.  The ordering

    bound <= feedback <= optimized displacement <= nulling

holds at every point; the interesting part is how quickly each gap closes
as the signal strengthens.  Run with --plot for the classic log-log figure.
"""

import argparse
import math

import numpy as np

from qsdr import (
    Priors,
    coherent_overlap,
    helstrom_bound,
    improved_kennedy_pc,
    kennedy_pc,
    optimal_beta_ik,
    optimal_beta_sd,
    simplified_dolinar_pc,
)


def sweep(q0: float, points: int) -> dict[str, np.ndarray]:
    pr = Priors(q0)
    g_sqs = np.geomspace(0.01, 2.0, points)
    out = {"gamma_sq": g_sqs}
    rows = {"helstrom": [], "kennedy": [], "improved_kennedy": [], "simplified_dolinar": []}
    for g_sq in g_sqs:
        g = math.sqrt(g_sq)
        rows["helstrom"].append(1.0 - helstrom_bound(pr, coherent_overlap(g_sq)))
        rows["kennedy"].append(1.0 - kennedy_pc(pr, g_sq))
        beta = optimal_beta_ik(pr, g)
        rows["improved_kennedy"].append(1.0 - improved_kennedy_pc(pr, g, beta))
        beta = optimal_beta_sd(pr, g, 1.0)  # T = 1, so psi = gamma
        rows["simplified_dolinar"].append(1.0 - simplified_dolinar_pc(pr, g, beta, 1.0))
    out.update({k: np.array(v) for k, v in rows.items()})
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--q0", type=float, default=0.5)
    ap.add_argument("--points", type=int, default=13)
    ap.add_argument("--plot", action="store_true", help="draw with matplotlib")
    args = ap.parse_args()

    data = sweep(args.q0, args.points)
    print(f"error probabilities at q0 = {args.q0}")
    print(f"{'gamma_sq':>9} {'bound':>11} {'feedback':>11} {'opt displ':>11} {'nulling':>11}")
    for i, g_sq in enumerate(data["gamma_sq"]):
        print(
            f"{g_sq:9.4f} {data['helstrom'][i]:11.5e} "
            f"{data['simplified_dolinar'][i]:11.5e} "
            f"{data['improved_kennedy'][i]:11.5e} {data['kennedy'][i]:11.5e}"
        )
    ratio = data["simplified_dolinar"][-1] / data["helstrom"][-1]
    print(f"\nat gamma_sq = 2 the feedback receiver errs {ratio:.3f}x the bound")

    if args.plot:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib is not installed; table only")
            return
        labels = {
            "helstrom": "quantum bound",
            "simplified_dolinar": "optimized feedback",
            "improved_kennedy": "optimized displacement",
            "kennedy": "nulling",
        }
        for key, label in labels.items():
            plt.loglog(data["gamma_sq"], data[key], label=label)
        plt.xlabel("mean photon number")
        plt.ylabel("error probability")
        plt.legend()
        plt.tight_layout()
        plt.show()


if __name__ == "__main__":
    main()
