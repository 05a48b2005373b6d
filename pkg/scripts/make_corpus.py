"""Regenerate the bundled discrete-joint corpus under src/fforms/corpus/.

The corpus deliberately contains groups of joints with identical
marginals but different dependence, so the estimator suite can show
that marginals alone cannot answer path-dependent questions.
"""

import json
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "fforms" / "corpus"


def markov_chain_tensor(transition, start, steps):
    t = np.asarray(transition, dtype=float)
    pi = np.asarray(start, dtype=float)
    shape = (pi.size,) * steps
    prob = np.zeros(shape)
    for idx in np.ndindex(shape):
        p = pi[idx[0]]
        for a, b in zip(idx[:-1], idx[1:]):
            p *= t[a, b]
        prob[idx] = p
    return prob


def comonotonic_pair(pmf):
    """Comonotonic coupling of two identical discrete marginals."""
    n = len(pmf)
    prob = np.zeros((n, n))
    for i in range(n):
        prob[i, i] = pmf[i]
    return prob


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    joints = {}

    # Group A: uniform on {0,1}^2 marginals, three couplings
    joints["pair_a_independent"] = {
        "support": [[0, 1], [0, 1]],
        "prob": [0.25, 0.25, 0.25, 0.25],
    }
    joints["pair_a_diagonal"] = {
        "support": [[0, 1], [0, 1]],
        "prob": [0.5, 0.0, 0.0, 0.5],
    }
    joints["pair_a_antidiagonal"] = {
        "support": [[0, 1], [0, 1]],
        "prob": [0.0, 0.5, 0.5, 0.0],
    }

    # Group B: fair-coin marginals over h=3, persistence varied
    for name, t in [
        ("pair_b_persistent", [[0.9, 0.1], [0.1, 0.9]]),
        ("pair_b_independent", [[0.5, 0.5], [0.5, 0.5]]),
        ("pair_b_antipersistent", [[0.1, 0.9], [0.9, 0.1]]),
    ]:
        prob = markov_chain_tensor(t, [0.5, 0.5], steps=3)
        joints[name] = {
            "support": [[0, 1], [0, 1], [0, 1]],
            "prob": prob.reshape(-1).tolist(),
        }

    # Group C: three-point marginals (0.2, 0.5, 0.3), two couplings
    pmf = [0.2, 0.5, 0.3]
    joints["pair_c_independent"] = {
        "support": [[0, 1, 2], [0, 1, 2]],
        "prob": np.outer(pmf, pmf).reshape(-1).tolist(),
    }
    joints["pair_c_comonotonic"] = {
        "support": [[0, 1, 2], [0, 1, 2]],
        "prob": comonotonic_pair(pmf).reshape(-1).tolist(),
    }

    # diverse extras
    step_pmfs = [[0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4], [0.25, 0.25, 0.25, 0.25]]
    prob = np.einsum("i,j,k->ijk", *[np.asarray(p) for p in step_pmfs])
    joints["independent_skewed_h3"] = {
        "support": [[0, 1, 2, 4], [-1, 0, 2, 3], [0, 1, 3, 5]],
        "prob": prob.reshape(-1).tolist(),
    }

    joints["asymmetric_values"] = {
        "support": [[0, 1, 2], [10, 20]],
        "prob": [0.15, 0.05, 0.10, 0.20, 0.05, 0.45],
    }

    # 5x5 correlated grid: discretized bivariate weights
    rng = np.random.default_rng(20240501)
    base = rng.random((5, 5)) + 4.0 * np.eye(5)
    base /= base.sum()
    joints["correlated_5x5"] = {
        "support": [[-2, -1, 0, 1, 2], [-2, -1, 0, 1, 2]],
        "prob": base.reshape(-1).tolist(),
    }

    joints["point_mass"] = {
        "support": [[3], [5]],
        "prob": [1.0],
    }

    for name, data in joints.items():
        total = float(np.sum(data["prob"]))
        assert abs(total - 1.0) < 1e-12, (name, total)
        data["name"] = name
        path = OUT / f"{name}.json"
        path.write_text(json.dumps(data, indent=1) + "\n")
        print("wrote", path)

    print(f"{len(joints)} corpus instances")


if __name__ == "__main__":
    main()
