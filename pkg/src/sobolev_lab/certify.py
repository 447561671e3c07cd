"""Variational constant estimates and slack-based inequality checks.

The reported constant is always the minimum Fisher-to-entropy ratio over a
concrete set of evaluated states, so it is an upper estimate by construction;
documented lower bounds come from the bracket table for the built-in walks.
Check verdicts are derived from the recorded signed slacks and never set
independently, so a report cannot claim a pass while holding a violation.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .algebra import (AlgebraElement, WeightedAlgebra, element_to_json,
                      make_rng, p_norm, random_positive)
from .entropy import bregman, entropy_vs_subalgebra, fisher_generator
from .errors import (ContractViolationError, DegenerateStateError, DomainError)
from .functions import power
from .models import (ConditionalExpectation, _base_spec, ampliate_generator,
                     bernoulli_laplace, martingale_subalgebra_expectations,
                     random_transposition, semigroup_apply)

DEFAULT_T_GRID = (0.0, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0)
DENOMINATOR_FLOOR = 1e-12


def worker_count():
    env = os.environ.get("SOBOLEV_LAB_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            raise ContractViolationError(
                "SOBOLEV_LAB_THREADS must be an integer") from None
    return min(4, os.cpu_count() or 1)


def parallel_map(fn, items):
    """Order-preserving map over items; SOBOLEV_LAB_THREADS caps the workers.

    Results are merged in input order regardless of completion order, so a
    run with N workers is bit-identical to a sequential one.
    """
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


# -- reports -------------------------------------------------------------------

def _allowed(tol_abs, tol_rel, record):
    return tol_abs + tol_rel * float(record.get("scale", 0.0))


@dataclass(frozen=True)
class CheckReport:
    """Signed-slack record batch with a derived verdict.

    A record fails when slack < -(absolute + relative * scale); the verdict
    is "fail" exactly when some record fails.  Informational reports keep the
    honest verdict but are not gated on by the suite aggregate.
    """

    check_id: str
    trials: int
    tolerance: tuple
    records: tuple
    verdict: str
    informational: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict == "pass" and self.violations:
            raise ContractViolationError(
                "a report cannot claim pass while holding a violation record")

    @classmethod
    def from_records(cls, check_id, records, tol_abs, tol_rel, trials=None,
                     informational=False, meta=None):
        records = tuple(dict(r) for r in records)
        bad = any(r["slack"] < -_allowed(tol_abs, tol_rel, r) for r in records)
        return cls(check_id=str(check_id),
                   trials=int(trials if trials is not None else len(records)),
                   tolerance=(float(tol_abs), float(tol_rel)),
                   records=records,
                   verdict="fail" if bad else "pass",
                   informational=bool(informational),
                   meta=dict(meta or {}))

    @property
    def worst_slack(self):
        return min((float(r["slack"]) for r in self.records), default=0.0)

    @property
    def violations(self):
        ta, tr = self.tolerance
        return tuple(r for r in self.records if r["slack"] < -_allowed(ta, tr, r))

    def to_json(self):
        return {
            "check": self.check_id,
            "trials": self.trials,
            "tolerance": {"absolute": self.tolerance[0],
                          "relative": self.tolerance[1]},
            "worst_slack": float(self.worst_slack),
            "verdict": self.verdict,
            "informational": self.informational,
            "records": [dict(r) for r in self.records],
            "meta": dict(self.meta),
        }


@dataclass(frozen=True)
class CertificationResult:
    """Outcome of a constant search: an upper estimate plus its witness."""

    model: dict
    f: dict
    ampliation: int
    estimated_lambda: float
    witness: dict
    witness_ratio: float
    n_restarts: int
    n_samples: int
    n_rejected: int
    restart_values: tuple
    bracket: tuple
    seed: int

    def to_json(self):
        return {
            "model": self.model,
            "f": self.f,
            "ampliation": self.ampliation,
            "estimated_lambda": float(self.estimated_lambda),
            "witness": self.witness,
            "witness_ratio": float(self.witness_ratio),
            "n_restarts": self.n_restarts,
            "n_samples": self.n_samples,
            "n_rejected": self.n_rejected,
            "restart_values": [None if v is None else float(v)
                               for v in self.restart_values],
            "bracket": None if self.bracket is None else [float(b) for b in self.bracket],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class OptimizerBudget:
    restarts: int = 32
    iterations: int = 2000
    seed: int = 0
    convergence: float = 1e-9
    state_floor: float = 1e-8
    curve_eps: tuple = tuple(np.logspace(-4.7, -1.0, 12))
    max_directions: int = 8

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


# -- the ratio -----------------------------------------------------------------

def sobolev_ratio(A, f, rho, epsilon=0.0):
    """Fisher information over relative entropy to the fixed-point algebra.

    States whose entropy denominator sits at or below 1e-12 are rejected as
    degenerate rather than returned as huge unstable quotients.
    """
    den = entropy_vs_subalgebra(f, rho, A.expectation).value
    if not den > DENOMINATOR_FLOOR:
        raise DegenerateStateError(
            f"entropy denominator {den:.3e} is below {DENOMINATOR_FLOOR:.0e}")
    num = fisher_generator(A, f, rho, epsilon)
    return num / den


def known_bracket(A, f):
    """Tabulated (lower, upper) constants for the built-in walks, else None.

    Uppers are twice the exact spectral gap; lowers hold for the power family
    on (1, 2) and for the entropy of x log x.
    """
    spec = _base_spec(A)
    if spec is None:
        return None
    model = spec.get("model")
    if f.label == "xlogx":
        low = {"random_transposition": 1.0, "bernoulli_laplace": 0.5,
               "depolarizing": 1.0}.get(model)
    elif f.p is not None and 1.0 < float(f.p) < 2.0:
        p = float(f.p)
        low = {"random_transposition": p, "bernoulli_laplace": p / 2.0,
               "depolarizing": p}.get(model)
    else:
        return None
    if low is None:
        return None
    upper = {"random_transposition": 4.0, "bernoulli_laplace": 2.0,
             "depolarizing": 2.0}[model]
    return (float(low), float(upper))


class _RatioEngine:
    """Batched surrogate for sobolev_ratio on stacked uniform blocks.

    Used to keep simplex descent cheap; authoritative candidate values are
    always recomputed through the public functions.
    """

    def __init__(self, A, f):
        alg = A.algebra
        k = alg.uniform_dim
        if k is None:
            raise ContractViolationError("the search engine needs uniform block dims")
        self.algebra = alg
        self.f = f
        self.m = alg.n_sites
        self.k = k
        self.wk = np.asarray(alg.weights, dtype=float) / k
        self._wkc = self.wk.astype(complex)
        if A.site_matrix is not None:
            L = np.asarray(A.site_matrix)
            self._apply = lambda arr: np.tensordot(L, arr, axes=(1, 0))
        else:
            T = A.plain_matrix()
            D = alg.coeff_dim
            shape = (self.m, k, k)
            self._apply = lambda arr: (T @ arr.reshape(D)).reshape(shape)
        E = A.expectation
        if E.kind == "partition":
            mu = np.asarray(alg.weights, dtype=float)
            plan = []
            for cell in E.cells:
                idx = np.asarray(cell, dtype=int)
                w = mu[idx]
                plan.append((idx, w / w.sum()))

            def eapply(arr):
                out = np.empty_like(arr)
                for idx, w in plan:
                    out[idx] = np.tensordot(w, arr[idx], axes=(0, 0))
                return out
        elif E.kind == "full":
            wkc = self._wkc
            eye = np.eye(k, dtype=complex)

            def eapply(arr):
                return np.einsum("s,saa->", wkc, arr) * np.broadcast_to(
                    eye, arr.shape)
        else:
            T = E.matrix()
            D = alg.coeff_dim
            shape = (self.m, k, k)

            def eapply(arr):
                return (T @ arr.reshape(D)).reshape(shape)
        self._eapply = eapply

    def ratio(self, arr):
        f = self.f
        lam, U = np.linalg.eigh(arr)
        lam = np.maximum(lam, 0.0)
        elam = np.maximum(np.linalg.eigh(self._eapply(arr))[0], 0.0)
        den = float(np.sum(self.wk[:, None] * f.eval_order(lam, 0))
                    - np.sum(self.wk[:, None] * f.eval_order(elam, 0)))
        if not den > DENOMINATOR_FLOOR:
            raise DegenerateStateError("degenerate entropy denominator")
        fp = np.einsum("sab,sb,scb->sac", U,
                       f.eval_order(lam, 1).astype(complex), U.conj())
        num = float(np.real(np.einsum("s,sab,sba->", self._wkc,
                                      self._apply(arr), fp)))
        return num / den


# -- constant search -----------------------------------------------------------

def _gap_directions(A, budget):
    """tau-normalized hermitian eigenvectors at the spectral gap."""
    lam, V = A.spectral()
    gap = A.gap()
    alg = A.algebra
    out = []
    for i in range(lam.size):
        if len(out) >= budget.max_directions:
            break
        if not (lam[i] > A.gap_tol and lam[i] <= gap * (1.0 + 1e-9) + 1e-12):
            continue
        phi = alg.unvec(V[:, i])
        for part in (phi.hermitian_part(),
                     ((phi - phi.adjoint()) * 1j).hermitian_part()):
            nrm = float(np.linalg.norm(alg.vec(part)))
            if nrm > 1e-10:
                out.append(part * (1.0 / nrm))
    return out[: budget.max_directions]


def estimate_constant(A, f, ampliation=1, budget=None):
    """Search for the optimal decay constant of A against the entropy of f.

    Two ingredients: a perturbative scan along kernel-gap eigenvectors on
    both sides of the identity (which pins the small-perturbation value, an
    upper bound of twice the gap), and simplex descent from random interior
    states.  Every retained candidate is re-evaluated through sobolev_ratio,
    and the reported estimate is the minimum of those values, so the witness
    reproduces it exactly.
    """
    budget = budget or OptimizerBudget()
    Ak = ampliate_generator(A, int(ampliation))
    alg = Ak.algebra
    engine = _RatioEngine(Ak, f)
    m, k = engine.m, engine.k
    floor = float(budget.state_floor)
    eye = np.broadcast_to(np.eye(k, dtype=complex), (m, k, k))
    nk2 = m * k * k

    def arr_from_params(x):
        g = x[:nk2] + 1j * x[nk2:]
        G = g.reshape(m, k, k)
        return G @ np.conj(np.transpose(G, (0, 2, 1))) + floor * eye

    counters = {"samples": 0, "rejected": 0}

    def public_value(arr):
        counters["samples"] += 1
        state = AlgebraElement.from_stacked(alg, arr).hermitian_part()
        try:
            return sobolev_ratio(Ak, f, state), state
        except (DegenerateStateError, DomainError):
            counters["rejected"] += 1
            return None, None

    # perturbative scan: candidates on both sides of the identity
    candidates = []  # (value, state)
    for phi in _gap_directions(Ak, budget):
        arrphi = phi.stacked()
        for eps in budget.curve_eps:
            for sign in (1.0, -1.0):
                arr = eye + (sign * float(eps)) * arrphi
                if float(np.linalg.eigvalsh(arr).min()) < 1e-8:
                    continue
                val, state = public_value(arr)
                if val is not None:
                    candidates.append((val, state))

    # simplex descent: random interior starts, then shrunken simplices
    # around the best point found so far
    def run_simplex(task):
        x0, scale = task
        local = [0, 0]

        def objective(x):
            local[0] += 1
            try:
                return engine.ratio(arr_from_params(x))
            except (DegenerateStateError, DomainError):
                local[1] += 1
                return 1e6

        n = x0.size
        sim = np.empty((n + 1, n))
        sim[0] = x0
        h = scale * np.where(np.abs(x0) > 0.25, np.abs(x0), 0.25)
        for i in range(n):
            sim[i + 1] = x0
            sim[i + 1, i] += h[i]
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"maxiter": budget.iterations,
                                "maxfev": 2 * budget.iterations + n + 2,
                                "xatol": budget.convergence,
                                "fatol": budget.convergence,
                                "initial_simplex": sim})
        return np.asarray(res.x, dtype=float), local[0], local[1]

    def random_start(ridx):
        rng = make_rng(budget.seed, 7, ridx)
        return rng.standard_normal(2 * nk2) * 0.5

    restart_values = []

    def absorb(results):
        for x, n_evals, n_rej in results:
            counters["samples"] += n_evals
            counters["rejected"] += n_rej
            val, state = public_value(arr_from_params(x))
            restart_values.append(val)
            if val is not None:
                candidates.append((val, state))

    n_phase1 = (budget.restarts + 1) // 2 if budget.restarts else 0
    tasks = [(random_start(r), 0.5 ** r) for r in range(n_phase1)]
    absorb(parallel_map(run_simplex, tasks))

    if budget.restarts > n_phase1 and candidates:
        pivot = min(range(len(candidates)), key=lambda i: candidates[i][0])
        x_piv = _params_from_state(candidates[pivot][1], floor)
        tasks = [(x_piv, 0.5 ** r) for r in range(n_phase1, budget.restarts)]
        absorb(parallel_map(run_simplex, tasks))

    if not candidates:
        raise DegenerateStateError("every evaluated state was rejected")

    best = min(range(len(candidates)), key=lambda i: candidates[i][0])
    est, witness = candidates[best]
    check = sobolev_ratio(Ak, f, witness)
    if abs(check - est) > 1e-8 * (1.0 + abs(est)):
        raise ContractViolationError("witness does not reproduce the estimate")

    return CertificationResult(
        model=A.spec, f=f.to_spec(), ampliation=int(ampliation),
        estimated_lambda=float(est), witness=element_to_json(witness),
        witness_ratio=float(check), n_restarts=int(budget.restarts),
        n_samples=counters["samples"], n_rejected=counters["rejected"],
        restart_values=tuple(restart_values), bracket=known_bracket(Ak, f),
        seed=int(budget.seed))


def _params_from_state(state, floor):
    arr = np.stack(state.blocks)
    lam, U = np.linalg.eigh(arr)
    s = np.sqrt(np.maximum(lam - floor, 1e-12))
    G = (U * s[:, None, :]) @ np.conj(np.transpose(U, (0, 2, 1)))
    g = G.reshape(-1)
    return np.concatenate([g.real, g.imag])


# -- decay and replay checks ---------------------------------------------------

def decay_check(A, f, lam, states, t_grid=None, seeds=None):
    """Entropy decay along the semigroup at rate lam.

    slack(t) = exp(-lam t) d(rho) - d(T_t rho); a shortfall beyond
    1e-9 * d(rho) fails.
    """
    t_grid = DEFAULT_T_GRID if t_grid is None else tuple(float(t) for t in t_grid)
    states = list(states)
    seeds = list(range(len(states))) if seeds is None else list(seeds)
    E = A.expectation
    records = []
    for sd, rho in zip(seeds, states):
        d0 = entropy_vs_subalgebra(f, rho, E).value
        for t in t_grid:
            rt = semigroup_apply(A, t, rho).hermitian_part()
            dt = entropy_vs_subalgebra(f, rt, E).value
            bound = math.exp(-lam * t) * d0
            records.append({"seed": sd, "t": t, "value": dt, "bound": bound,
                            "slack": bound - dt, "scale": d0})
    return CheckReport.from_records(
        "entropy_decay", records, 0.0, 1e-9, trials=len(states),
        meta={"lambda": float(lam), "f": f.to_spec(), "model": A.spec,
              "t_grid": list(t_grid)})


def fisher_decay_check(A, f, lam, states, t_grid=None, seeds=None):
    """Fisher information decay at rate lam, reported but never asserted:
    the slack is informational since no such constant is certified here."""
    t_grid = DEFAULT_T_GRID if t_grid is None else tuple(float(t) for t in t_grid)
    states = list(states)
    seeds = list(range(len(states))) if seeds is None else list(seeds)
    records = []
    for sd, rho in zip(seeds, states):
        i0 = fisher_generator(A, f, rho)
        for t in t_grid:
            rt = semigroup_apply(A, t, rho).hermitian_part()
            it = fisher_generator(A, f, rt)
            bound = math.exp(-lam * t) * i0
            records.append({"seed": sd, "t": t, "value": it, "bound": bound,
                            "slack": bound - it, "scale": i0})
    return CheckReport.from_records(
        "fisher_decay", records, 0.0, 1e-9, trials=len(states),
        informational=True,
        meta={"lambda": float(lam), "f": f.to_spec(), "model": A.spec,
              "t_grid": list(t_grid)})


def pnorm_decay_check(A, p, lam, states, t_grid=None, seeds=None,
                      certified=None):
    """Return-to-average norm decay implied by a certified entropy constant.

    Requires p in (1, 2) and 2*lam at or below a certified lower bound for
    the power-p constant of A (the tabulated one when none is passed).
    The bound is exp(-lam t) sqrt(2/(p(p-1))) |rho|_p^{1-p/2}
    (|rho|_p^p - |E rho|_p^p)^{1/2}.
    """
    p = float(p)
    if not 1.0 < p < 2.0:
        raise DomainError("p must lie in (1, 2)")
    if certified is None:
        bracket = known_bracket(A, power(p))
        certified = None if bracket is None else bracket[0]
    if certified is None:
        raise ContractViolationError(
            "no certified constant available; pass certified= explicitly")
    if 2.0 * lam > float(certified) + 1e-12:
        raise ContractViolationError(
            "2*lam exceeds the certified lower bound for this walk")
    t_grid = DEFAULT_T_GRID if t_grid is None else tuple(float(t) for t in t_grid)
    states = list(states)
    seeds = list(range(len(states))) if seeds is None else list(seeds)
    E = A.expectation
    records = []
    for sd, rho in zip(seeds, states):
        e_rho = E.apply(rho).hermitian_part()
        np_rho = p_norm(rho, p)
        np_e = p_norm(e_rho, p)
        const = (math.sqrt(2.0 / (p * (p - 1.0)))
                 * np_rho ** (1.0 - p / 2.0)
                 * math.sqrt(max(np_rho ** p - np_e ** p, 0.0)))
        for t in t_grid:
            rt = semigroup_apply(A, t, rho).hermitian_part()
            lhs = p_norm(rt - e_rho, p)
            rhs = math.exp(-lam * t) * const
            records.append({"seed": sd, "t": t, "value": lhs, "bound": rhs,
                            "slack": rhs - lhs, "scale": rhs})
    # absolute floor absorbs roundoff when rho is already averaged (bound 0)
    return CheckReport.from_records(
        "pnorm_decay", records, 1e-12, 1e-9, trials=len(states),
        meta={"lambda": float(lam), "p": p, "model": A.spec,
              "certified": float(certified), "t_grid": list(t_grid)})


def lemma_rtl_check(n=2, matrix_dim=1, p=1.5, trials=100, seed=0):
    """Pair-energy bound for the block average over n uniform sites.

    For positive f the entropy gap tau(f^p) - tau((Ef)^p) stays below the
    unordered-pair average (1/(2 n^2)) sum_{x,y} of the normalized block
    trace of (f_x - f_y)(f_x^{p-1} - f_y^{p-1}).
    """
    p = float(p)
    if not 1.0 < p < 2.0:
        raise DomainError("p must lie in (1, 2)")
    alg = WeightedAlgebra.block_sites(n, matrix_dim)
    E = ConditionalExpectation.from_partition(alg, (tuple(range(n)),))
    fp = power(p)
    records = []
    for trial in range(int(trials)):
        fel = random_positive(alg, floor=1e-3, seed=make_rng(seed, 11, trial))
        lhs = entropy_vs_subalgebra(fp, fel, E).value
        pow_blocks = []
        for b in fel.blocks:
            lam, U = np.linalg.eigh(b)
            pow_blocks.append((U * np.maximum(lam, 0.0) ** (p - 1.0)) @ U.conj().T)
        rhs = 0.0
        for x in range(n):
            for y in range(n):
                d1 = fel.blocks[x] - fel.blocks[y]
                d2 = pow_blocks[x] - pow_blocks[y]
                rhs += float(np.trace(d1 @ d2).real) / matrix_dim
        rhs /= 2.0 * n * n
        records.append({"seed": trial, "value": lhs, "bound": rhs,
                        "slack": rhs - lhs, "scale": 1.0 + rhs})
    return CheckReport.from_records(
        "lemma_rtl", records, 0.0, 1e-9, trials=trials,
        meta={"n": int(n), "matrix_dim": int(matrix_dim), "p": p})


def martingale_recursion_replay(family, n, p=1.5, r=1, matrix_dim=1,
                                trials=20, seed=0):
    """Two-step entropy decomposition along pinned-coordinate subalgebras.

    For the transposition walk on n letters the conditioned parts obey
    mean_i d(f || E_i f) <= (n-2)/((n-1) p) I and the averaged parts obey
    mean_i d(E_i f || E f) <= I/(n p).  For the occupancy walk on n sites
    the conditioned constant is ((n-2)/(n-1)) (2/p) and the averaged parts
    are bounded in full sum: sum_i d(E_i f || E f) <= (2/p) I.
    """
    p = float(p)
    if not 1.0 < p < 2.0:
        raise DomainError("p must lie in (1, 2)")
    fp = power(p)
    if family == "rt":
        A = random_transposition(n, matrix_dim)
        c_cond = (n - 2.0) / ((n - 1.0) * p)
        c_avg = 1.0 / (n * p)
        sum_avg = False
    elif family == "bl":
        A = bernoulli_laplace(n, r, matrix_dim)
        c_cond = ((n - 2.0) / (n - 1.0)) * (2.0 / p)
        c_avg = 2.0 / p
        sum_avg = True
    else:
        raise ContractViolationError("family must be 'rt' or 'bl'")
    pinned = martingale_subalgebra_expectations(A)
    E = A.expectation
    records = []
    for trial in range(int(trials)):
        fel = random_positive(A.algebra, floor=1e-3, seed=make_rng(seed, 13, trial))
        fisher = fisher_generator(A, fp, fel)
        ef = E.apply(fel).hermitian_part()
        d_cond = [entropy_vs_subalgebra(fp, fel, Ei).value for Ei in pinned]
        d_avg = [bregman(fp, Ei.apply(fel).hermitian_part(), ef).value
                 for Ei in pinned]
        lhs1 = sum(d_cond) / len(pinned)
        rhs1 = c_cond * fisher
        lhs2 = sum(d_avg) if sum_avg else sum(d_avg) / len(pinned)
        rhs2 = c_avg * fisher
        records.append({"seed": trial, "part": "conditioned", "value": lhs1,
                        "bound": rhs1, "slack": rhs1 - lhs1, "scale": 1.0 + rhs1})
        records.append({"seed": trial, "part": "averaged", "value": lhs2,
                        "bound": rhs2, "slack": rhs2 - lhs2, "scale": 1.0 + rhs2})
    return CheckReport.from_records(
        f"martingale_{family}", records, 0.0, 1e-9, trials=trials,
        meta={"family": family, "n": int(n), "p": p, "r": int(r),
              "matrix_dim": int(matrix_dim)})
