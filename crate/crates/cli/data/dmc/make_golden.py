"""Builds the bundled DMC instances and their golden reports.

Independent of the Rust code: joints are built with numpy broadcasting and
the information measures come from entropies of numpy marginals.

    python3 make_golden.py
"""
import itertools
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent
TOL = 1e-6


def modular(n, noise):
    """P(out | in) for out = in + noise (mod n)."""
    return np.array([[noise[(o - i) % n] for o in range(n)] for i in range(n)])


def instance(pv1, pv2, n1, n2):
    n = len(pv1)
    pv2 = np.array(pv2)  # P(v2 | v1)
    py1 = modular(n, n1)  # Y1 = X1 + N1
    py2 = modular(n, n2)  # Y2 = X1 + X2 + N2 (active), X1 + N2 (silent)
    active = np.zeros((n,) * 6)
    silent = np.zeros((n,) * 4)
    for v1, v2, y1, y2 in itertools.product(range(n), repeat=4):
        x1, x2 = v1, v2
        active[v1, v2, x1, x2, y1, y2] = pv1[v1] * pv2[v1, v2] * py1[x1, y1] * py2[(x1 + x2) % n, y2]
    for v1, y1, y2 in itertools.product(range(n), repeat=3):
        silent[v1, v1, y1, y2] = pv1[v1] * py1[v1, y1] * py2[v1, y2]
    return active, silent


def entropy(p, names, keep):
    axes = tuple(i for i, nm in enumerate(names) if nm not in keep)
    m = p.sum(axis=axes).ravel()
    m = m[m > 0]
    return float(-(m * np.log2(m)).sum())


def mi(p, names, a, b):
    return entropy(p, names, a) + entropy(p, names, b) - entropy(p, names, a + b)


def report(active, silent):
    an = ["V1", "V2", "X1", "X2", "Y1", "Y2"]
    sn = ["V1", "X1", "Y1", "Y2"]
    i_y1 = mi(silent, sn, ["V1"], ["Y1"])
    i_y2 = mi(silent, sn, ["V1"], ["Y2"])
    r2 = max(0.0, mi(active, an, ["V2"], ["Y2"]) - mi(active, an, ["V2"], ["V1"]))
    slack = mi(active, an, ["V1"], ["Y1"]) - i_y2 - (i_y1 - i_y2)
    secrecy = mi(active, an, ["V1"], ["V2", "Y2"]) - i_y2
    feasible = slack >= -TOL and abs(secrecy) <= TOL
    return [
        ("r2", r2),
        ("r_s1", i_y1 - i_y2),
        ("r_s1_prime", i_y2),
        ("reliability_slack", slack),
        ("secrecy_residual", secrecy),
        ("feasible", feasible),
    ]


def fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    return f"{0.0 if abs(v) < 5e-13 else v:.12f}"


def write_pmf(path, p, names):
    lines = [",".join(f"{nm}:{k}" for nm, k in zip(names, p.shape)) + ",p"]
    for idx in itertools.product(*(range(k) for k in p.shape)):
        if p[idx] > 0:
            lines.append(",".join(map(str, idx)) + f",{float(p[idx])!r}")
    path.write_text("\n".join(lines) + "\n")


INSTANCES = {
    # V2 independent of V1: T2 adds its message without changing what U2 learns about V1
    "binary": ([0.7, 0.3], [[0.6, 0.4], [0.6, 0.4]], [0.95, 0.05], [0.8, 0.2]),
    # V2 correlated with V1: leaks beyond the silent baseline
    "ternary": (
        [0.5, 0.3, 0.2],
        [[0.4, 0.35, 0.25], [0.25, 0.4, 0.35], [0.35, 0.25, 0.4]],
        [0.9, 0.05, 0.05],
        [0.7, 0.2, 0.1],
    ),
}

if __name__ == "__main__":
    for name, args in INSTANCES.items():
        active, silent = instance(*args)
        write_pmf(HERE / f"{name}_active.csv", active, ["V1", "V2", "X1", "X2", "Y1", "Y2"])
        write_pmf(HERE / f"{name}_silent.csv", silent, ["V1", "X1", "Y1", "Y2"])
        (HERE / f"{name}.ini").write_text(f"[dmc]\nactive = {name}_active.csv\nsilent = {name}_silent.csv\n")
        body = "".join(f"{k} = {fmt(v)}\n" for k, v in report(active, silent))
        (HERE / f"{name}.golden").write_text(body)
        print(name)
        print(body, end="")
