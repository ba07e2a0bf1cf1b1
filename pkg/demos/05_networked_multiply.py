"""Multiply across a fleet of TCP workers, surviving a dead one.

The coordinator encodes shares locally, sends one task frame per worker, and
decodes as soon as the recovery threshold is reached - workers that are slow,
dead, or unreachable simply count as stragglers.  Here the fleet is six
in-process servers on loopback; in production each would be `sdmm
serve-worker` on its own machine.
"""

import threading

import numpy as np

from sdmm import SchemeParams, coordinate, ping, sample_inputs, serve_worker
from sdmm.schemes import InsufficientResponsesError


def start_fleet(count):
    servers = []
    for _ in range(count):
        server = serve_worker()  # port 0 -> the OS picks a free port
        threading.Thread(target=server.serve_forever, daemon=True).start()
        servers.append(server)
    return servers


def main():
    params = SchemeParams("cmatdot", x=1, m_parts=2, stragglers=1, sigma2=0.0, seed=11)
    print(f"scheme needs R={params.recovery_threshold} of N={params.num_workers} workers")

    servers = start_fleet(params.num_workers)
    addresses = [("127.0.0.1", s.port) for s in servers]
    print("fleet:", ", ".join(f"{h}:{p}" for h, p in addresses))
    print("all workers answer ping:", all(ping(h, p) for h, p in addresses))

    rng = np.random.default_rng(0)
    a, b = sample_inputs(rng, params, (16, 8, 12))
    product = coordinate(addresses, params, a, b, timeout=10)
    exact = a @ b
    print(f"all alive: rel error {np.linalg.norm(product - exact) / np.linalg.norm(exact):.3e}")

    servers[0].shutdown()
    servers[0].server_close()
    print("\nkilled one worker; the straggler budget S=1 absorbs it:")
    product = coordinate(addresses, params, a, b, timeout=10)
    print(f"one dead: rel error {np.linalg.norm(product - exact) / np.linalg.norm(exact):.3e}")

    servers[1].shutdown()
    servers[1].server_close()
    print("\nkilled a second worker; now only R-1 can answer:")
    try:
        coordinate(addresses, params, a, b, timeout=5)
    except InsufficientResponsesError as err:
        print(f"decode refused, as it must: {err}")

    for server in servers[2:]:
        server.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
