"""Follow one request through a three-node network, message by message.

A client asks for a segment it has no route for.  Under pull-based BFR it
holds the Interest, broadcasts a CAR, the server answers with a CA naming
the file, and only then does the Interest travel.  FaR floods instead, and
push-based BFR already knows the route from the server's periodic CA.

    python3 demos/walkthrough.py
"""

from __future__ import annotations

from pullbfr.bloom import make_params
from pullbfr.engine import Simulator
from pullbfr.names import parse
from pullbfr.protocols import STRATEGIES, RunStats, StrategyParams
from pullbfr.topology import parse_topology

TOPOLOGY = """
node C client
node R router
node S server
link C R 1000000000 2000000
link R S 1000000000 3000000
"""


class Printer:
    def __init__(self, sim):
        self.sim = sim

    def on_data(self, name):
        print(f"  {self.sim.now / 1e6:8.3f} ms  C's application receives {name}")

    def on_failure(self, name):
        print(f"  {self.sim.now / 1e6:8.3f} ms  C's application gives up on {name}")


def walk(strategy: str) -> None:
    print(f"\n{strategy}")
    topo = parse_topology(TOPOLOGY)
    sim = Simulator(topo, seed=1)
    params = StrategyParams(bf_params=make_params(1000, 0.0638), f_r=1.0)
    stats = RunStats(horizon=10**12)
    hosted = {"S": [parse("/videos/cats/intro")]}
    nodes = {n: STRATEGIES[strategy](sim, n, role, params, stats, hosted.get(n, ())) for n, role in topo.roles.items()}
    nodes["C"].app = Printer(sim)

    send = sim.transmit

    def narrate(node_id, face, msg):
        peer = sim.faces[node_id][face][2]
        print(f"  {sim.now / 1e6:8.3f} ms  {node_id} -> {peer}  {msg.kind.name:<8} {msg.name}  ({msg.size} B)")
        return send(node_id, face, msg)

    sim.transmit = narrate
    if strategy == "push-bfr":
        for n in nodes.values():
            n.start(0)
    sim.at(50_000_000, nodes["C"].express_interest, parse("/videos/cats/intro/s0"))
    sim.run()


if __name__ == "__main__":
    for s in ("pull-bfr", "far", "push-bfr"):
        walk(s)
