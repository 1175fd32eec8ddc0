"""How long should a router wait before forwarding CARs and CAs?

Routers buffer CAR/CA messages per outgoing face for an aggregation time
delta and send the union of what arrived.  Waiting longer folds more
messages together, so fewer bytes cross the links, at the cost of a later
first Interest.  This demo sweeps delta on the bundled 40-router network
and prints both sides of the trade-off.  With ``--plot`` it also saves a
figure (needs matplotlib).

    python3 demos/aggregation_delay.py [--seeds 3] [--plot delta.png]
"""

from __future__ import annotations

import argparse

from pullbfr.config import parse_config
from pullbfr.harness import run_simulation
from pullbfr.report import avg_rtt

DELTAS_MS = (0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--plot", default=None, help="write a PNG to this path")
    args = ap.parse_args()

    rows = []
    print(f"{'delta ms':>9} {'CAR+CA MB':>10} {'aggregates':>11} {'avg RTT ms':>11}")
    for d in DELTAS_MS:
        reports = [
            run_simulation(
                parse_config({"seed": s, "pull": {"delta_ms": d}, "workload": {"arrivals": "open"}})
            )
            for s in range(1, args.seeds + 1)
        ]
        mb = sum(r.advert_overhead_bytes for r in reports) / len(reports) / 1e6
        agg = sum(r.aggregates_created for r in reports) / len(reports)
        rtt = sum(avg_rtt(r) for r in reports) / len(reports) * 1e3
        rows.append((d, mb, agg, rtt))
        print(f"{d:9.1f} {mb:10.3f} {agg:11.0f} {rtt:11.2f}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(5, 3.2))
        ax.plot([r[0] for r in rows], [r[1] for r in rows], marker="o")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("aggregation time delta (ms)")
        ax.set_ylabel("CAR + CA bytes (MB)")
        ax2 = ax.twinx()
        ax2.plot([r[0] for r in rows], [r[3] for r in rows], marker="s", color="tab:red")
        ax2.set_ylabel("average RTT (ms)", color="tab:red")
        fig.tight_layout()
        fig.savefig(args.plot, dpi=150)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()
