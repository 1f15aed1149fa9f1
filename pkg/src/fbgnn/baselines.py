"""Classical retry baselines: random perturbation and enhanced feedback.

Both re-run BP with modified channel priors after a flagged attempt, up to a
maximum number of attempts.  Every attempt modifies the ORIGINAL prior, not
the previous attempt's, and the set of frustrated checks is recomputed from
the latest BP output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import bp4
from .css import CssCode, Syndrome
from .graph import as_graph


@dataclass
class BaselineConfig:
    max_attempts: int = 10
    perturb_strength: tuple[float, float] = (1.0, 2.0)  # uniform scaling of error mass
    enhanced_mass: float = 0.9  # probability mass pushed onto the favored components
    prior_p: float = bp4.DEFAULT_PRIOR_P

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("need at least one attempt")
        if not 0.5 < self.enhanced_mass < 1.0:
            raise ValueError("enhanced mass must lie in (0.5, 1)")


def _base_probs(n: int, p: float) -> np.ndarray:
    """(n, 4) category probabilities (I, X, Y, Z) of the uniform depolarizing prior."""
    probs = np.empty((n, 4))
    probs[:, 0] = 1.0 - p
    probs[:, 1:] = p / 3.0
    return probs


def _llrs_from_probs(probs: np.ndarray) -> np.ndarray:
    """LLR triples log(p_I / p_W) from (n, 4) category probabilities."""
    return np.log(probs[:, :1]) - np.log(probs[:, 1:])


def _frustrated_checks(g, syn: Syndrome, e_hat) -> list[tuple[str, int]]:
    """Checks whose parity under the current estimate disagrees with the syndrome."""
    mism_x = np.flatnonzero(g.x.check_parity(e_hat.ez) != syn.sz)
    mism_z = np.flatnonzero(g.z.check_parity(e_hat.ex) != syn.sx)
    return [("x", int(j)) for j in mism_x] + [("z", int(j)) for j in mism_z]


def _check_support(g, sector: str, j: int) -> np.ndarray:
    sg = g.x if sector == "x" else g.z
    return sg.edge_var[sg.check_ptr[j]:sg.check_ptr[j + 1]]


def random_perturbation_decode(code: CssCode, syn: Syndrome, cfg: BaselineConfig,
                               bp_cfg: bp4.BpConfig, rng: np.random.Generator) -> bp4.BpOutcome:
    """Retry BP with randomly scaled priors on the qubits of frustrated checks.

    Each retry picks a uniformly random nonempty subset of the frustrated
    checks and scales the error mass of every qubit they touch by a factor
    drawn uniformly from perturb_strength, renormalizing the four-category
    distribution.
    """
    g = as_graph(code)
    base = _base_probs(g.n, cfg.prior_p)
    out = bp4.run(g, syn, _llrs_from_probs(base), bp_cfg)
    attempts = 0
    while not out.converged and attempts < cfg.max_attempts - 1:
        attempts += 1
        frustrated = _frustrated_checks(g, syn, out.e_hat)
        if not frustrated:
            break
        pick = np.zeros(len(frustrated), dtype=bool)
        while not pick.any():  # uniform over nonempty subsets
            pick = rng.random(len(frustrated)) < 0.5
        qubits = set()
        for flag, (sector, j) in zip(pick, frustrated):
            if flag:
                qubits.update(int(v) for v in _check_support(g, sector, j))
        probs = base.copy()
        lo, hi = cfg.perturb_strength
        for v in sorted(qubits):
            probs[v, 1:] *= rng.uniform(lo, hi)
            probs[v] /= probs[v].sum()
        out = bp4.run(g, syn, _llrs_from_probs(probs), bp_cfg)
    return out


def enhanced_feedback_decode(code: CssCode, syn: Syndrome, cfg: BaselineConfig,
                             bp_cfg: bp4.BpConfig, rng: np.random.Generator) -> bp4.BpOutcome:
    """Retry BP after biasing one qubit of one frustrated check.

    If the check's observed syndrome bit is 1, the anticommuting components
    get mass q (split equally) and the commuting ones (including I) share
    1 - q; for a 0 bit the roles are reversed.
    """
    g = as_graph(code)
    base = _base_probs(g.n, cfg.prior_p)
    out = bp4.run(g, syn, _llrs_from_probs(base), bp_cfg)
    attempts = 0
    while not out.converged and attempts < cfg.max_attempts - 1:
        attempts += 1
        frustrated = _frustrated_checks(g, syn, out.e_hat)
        if not frustrated:
            break
        sector, j = frustrated[rng.integers(len(frustrated))]
        support = _check_support(g, sector, j)
        v = int(support[rng.integers(len(support))])
        fired = (syn.sz if sector == "x" else syn.sx)[j]
        # X-sector stabilizers anticommute with Y and Z; Z-sector with X and Y
        anti = (2, 3) if sector == "x" else (1, 2)
        comm = tuple(sorted(set(range(4)) - set(anti)))
        q = cfg.enhanced_mass
        probs = base.copy()
        heavy, light = (anti, comm) if fired else (comm, anti)
        probs[v, list(heavy)] = q / 2.0
        probs[v, list(light)] = (1.0 - q) / 2.0
        out = bp4.run(g, syn, _llrs_from_probs(probs), bp_cfg)
    return out
