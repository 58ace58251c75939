"""Decide and certify batch / PIR properties of an array code.

A batch request is a multiset of k symbol indices.  Serving it means
partitioning the m buckets into k non-empty parts, one per request, such that
part j can produce the requested symbol: each bucket in the part answers with
one linear combination of its stored symbols and the user combines the
answers.  Two response regimes are supported:

* linear      -- a bucket may answer any linear combination of its contents;
* projection  -- a bucket may only return one stored symbol verbatim (the
                 classic batch-code regime), so its response vector must be a
                 unit vector.

`find_plan` is an exact decision procedure (backtracking over candidate
recovery sets in increasing cardinality); `certify_plan` checks a plan as a
coefficient identity over the field, independently of how it was found.
Every plan returned by the search is certified before being handed out.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional, Sequence

from .field import Echelon, span_solve, unit_vector
from .model import CodeSpec


class ResponseModel(Enum):
    LINEAR = "linear"
    PROJECTION = "projection"

    @classmethod
    def parse(cls, text) -> "ResponseModel":
        if isinstance(text, cls):
            return text
        try:
            return cls(str(text).lower())
        except ValueError:
            raise ValueError(f"unknown response model {text!r}") from None


def normalize_request(indices: Iterable[int], n: int) -> tuple:
    """Sort a request multiset and range-check it against [1, n]."""
    req = tuple(sorted(int(i) for i in indices))
    if not req:
        raise ValueError("empty batch request")
    for i in req:
        if not 1 <= i <= n:
            raise ValueError(f"request index {i} out of range [1, {n}]")
    return req


def all_batch_requests(n: int, k: int):
    """All C(n+k-1, k) multisets of size k over [1, n], lexicographic."""
    return itertools.combinations_with_replacement(range(1, n + 1), k)


def pir_requests(n: int, k: int):
    """The n identical-index requests <i, ..., i>."""
    return ((i,) * k for i in range(1, n + 1))


@dataclass(frozen=True)
class RecoveryPlan:
    """A verifiable certificate for one served batch request.

    sets       -- k disjoint non-empty bucket-index sets covering [m]
                  (1-based), aligned with the sorted request
    responses  -- per bucket, the response vector in F_p^{N_ell}
                  (zero vector for non-contributing buckets)
    combos     -- per request j, ((bucket, coefficient), ...) over its set
    """

    request: tuple
    sets: tuple
    responses: tuple
    combos: tuple


@dataclass(frozen=True)
class VerificationReport:
    kind: str  # "bac" or "pir"
    k: int
    model: ResponseModel
    checked: int
    failures: tuple  # of (request, reason)
    elapsed_s: float

    @property
    def status(self) -> str:
        return "pass" if not self.failures else "fail"

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "checked": self.checked,
            "failures": [
                {"request": list(req), "reason": reason} for req, reason in self.failures
            ],
        }


class SpanEngine:
    """Per-code caches for joint-span queries over bucket subsets.

    Subsets are frozensets of 0-based bucket indices.  Echelon bases are
    write-once per subset, so concurrent readers within a process are safe.
    """

    def __init__(self, code: CodeSpec):
        self.code = code
        self._bases: dict = {}
        self._linear: dict = {}
        self._projection: dict = {}

    def _basis(self, subset: frozenset) -> Echelon:
        ech = self._bases.get(subset)
        if ech is None:
            ech = Echelon(self.code.field, self.code.n)
            for ell0 in sorted(subset):
                for col in self.code.buckets[ell0]:
                    ech.add(col)
            self._bases[subset] = ech
        return ech

    def joint_rank(self, subset: frozenset) -> int:
        return self._basis(subset).rank

    def recovers_linear(self, subset: frozenset, i0: int) -> bool:
        key = (subset, i0)
        hit = self._linear.get(key)
        if hit is None:
            hit = self._basis(subset).contains_unit(i0)
            self._linear[key] = hit
        return hit

    def recovers_projection(self, subset: frozenset, i0: int) -> bool:
        return self.projection_choice(subset, i0) is not None

    def projection_choice(self, subset: frozenset, i0: int) -> Optional[tuple]:
        """A choice of at most one column per bucket whose span contains e_i,
        as ((bucket0, col_idx), ...), or None.  Deterministic DFS, buckets
        ascending, skip-first, with an early exit once the span suffices."""
        key = (subset, i0)
        if key in self._projection:
            return self._projection[key]
        if not self.recovers_linear(subset, i0):
            # projection responses are a restriction of linear ones
            self._projection[key] = None
            return None
        order = sorted(subset)
        buckets = self.code.buckets
        fieldobj = self.code.field
        n = self.code.n

        def dfs(idx: int, ech: Echelon, chosen: tuple):
            if ech.contains_unit(i0):
                return chosen
            if idx == len(order):
                return None
            res = dfs(idx + 1, ech, chosen)
            if res is not None:
                return res
            ell0 = order[idx]
            for s, col in enumerate(buckets[ell0]):
                ech2 = Echelon(fieldobj, n)
                ech2.pivots = list(ech.pivots)
                ech2.rows = list(ech.rows)
                if not ech2.add(col):
                    continue
                res = dfs(idx + 1, ech2, chosen + ((ell0, s),))
                if res is not None:
                    return res
            return None

        result = dfs(0, Echelon(fieldobj, n), ())
        self._projection[key] = result
        return result

    def recovers(self, subset: frozenset, i0: int, model: ResponseModel) -> bool:
        if model is ResponseModel.LINEAR:
            return self.recovers_linear(subset, i0)
        return self.recovers_projection(subset, i0)

    def solve_linear(self, subset: frozenset, i0: int) -> Optional[dict]:
        """Per-bucket response vectors realizing e_i from the subset's joint
        span, via the deterministic lowest-index solve."""
        order = sorted(subset)
        gens = []
        owners = []
        for ell0 in order:
            for s, col in enumerate(self.code.buckets[ell0]):
                gens.append(col)
                owners.append((ell0, s))
        coeffs = span_solve(unit_vector(i0, self.code.n), gens, self.code.field)
        if coeffs is None:
            return None
        responses: dict = {}
        for (ell0, s), c in zip(owners, coeffs):
            if c:
                responses.setdefault(ell0, {})[s] = c
        return responses


# engine registry, keyed by object identity; entries live for the process
# lifetime (the handful of codes a run touches makes this a non-issue)
_ENGINES: dict = {}


def engine_for(code: CodeSpec) -> SpanEngine:
    entry = _ENGINES.get(id(code))
    if entry is None or entry[0] is not code:
        entry = (code, SpanEngine(code))
        _ENGINES[id(code)] = entry
    return entry[1]


def certify_plan(
    code: CodeSpec,
    request: Sequence[int],
    plan: RecoveryPlan,
    model: ResponseModel = ResponseModel.LINEAR,
) -> bool:
    """Check a plan against the code: partition shape, the per-request
    coefficient identity, and (projection mode) unit responses.

    Shape mismatches raise ValueError; a well-shaped but invalid plan
    returns False.
    """
    model = ResponseModel.parse(model)
    req = normalize_request(request, code.n)
    m = code.m
    p = code.field.p
    if len(plan.responses) != m:
        raise ValueError(f"plan has {len(plan.responses)} responses, code has {m} buckets")
    for ell0, resp in enumerate(plan.responses):
        if len(resp) != len(code.buckets[ell0]):
            raise ValueError(
                f"response for bucket {ell0 + 1} has length {len(resp)}, "
                f"bucket stores {len(code.buckets[ell0])}"
            )
    if len(plan.sets) != len(plan.combos):
        raise ValueError("plan sets and combos disagree in length")
    for part in plan.sets:
        for ell in part:
            if not 1 <= ell <= m:
                raise ValueError(f"bucket index {ell} out of range [1, {m}]")
    for part, combo in zip(plan.sets, plan.combos):
        for ell, _ in combo:
            if ell not in part:
                raise ValueError(f"combo references bucket {ell} outside its recovery set")

    # (a) partition of [m] into exactly k non-empty parts
    if len(plan.sets) != len(req):
        return False
    seen: set = set()
    for part in plan.sets:
        if not part:
            return False
        for ell in part:
            if ell in seen:
                return False
            seen.add(ell)
    if len(seen) != m:
        return False

    # (c) projection regime: nonzero responses must be unit vectors
    if model is ResponseModel.PROJECTION:
        for resp in plan.responses:
            nz = [v % p for v in resp if v % p]
            if nz and nz != [1]:
                return False

    # (b) coefficient identity per request, over the generator columns
    n = code.n
    for j, i in enumerate(req):
        acc = [0] * n
        for ell, coeff in plan.combos[j]:
            bucket = code.buckets[ell - 1]
            resp = plan.responses[ell - 1]
            for s, r in enumerate(resp):
                w = (coeff * r) % p
                if w:
                    col = bucket[s]
                    for d in range(n):
                        if col[d]:
                            acc[d] = (acc[d] + w * col[d]) % p
        target = [0] * n
        target[i - 1] = 1
        if acc != target:
            return False
    return True


def _plan_from_parts(
    code: CodeSpec,
    req: tuple,
    parts: list,
    model: ResponseModel,
    engine: SpanEngine,
) -> RecoveryPlan:
    """Assemble response vectors and combos for chosen parts (0-based)."""
    p = code.field.p
    responses = [[0] * len(b) for b in code.buckets]
    combos = []
    for part0, i in zip(parts, req):
        subset = frozenset(part0)
        combo = []
        if model is ResponseModel.LINEAR:
            solved = engine.solve_linear(subset, i - 1)
            if solved is None:
                raise AssertionError("search accepted an unsolvable part")
            for ell0 in sorted(part0):
                for s, c in solved.get(ell0, {}).items():
                    responses[ell0][s] = c
                combo.append((ell0 + 1, 1))
        else:
            choice = engine.projection_choice(subset, i - 1)
            if choice is None:
                raise AssertionError("search accepted an unsolvable part")
            cols = [code.buckets[ell0][s] for ell0, s in choice]
            coeffs = span_solve(unit_vector(i - 1, code.n), cols, code.field)
            if coeffs is None:
                raise AssertionError("projection choice lost its witness")
            chosen = {}
            for (ell0, s), c in zip(choice, coeffs):
                if c:
                    responses[ell0][s] = 1
                    chosen[ell0] = c
            for ell0 in sorted(part0):
                combo.append((ell0 + 1, chosen.get(ell0, 1) % p))
        combos.append(tuple(combo))
    return RecoveryPlan(
        request=req,
        sets=tuple(frozenset(ell0 + 1 for ell0 in part0) for part0 in parts),
        responses=tuple(tuple(r) for r in responses),
        combos=tuple(combos),
    )


def find_plan(
    code: CodeSpec,
    request: Sequence[int],
    model: ResponseModel = ResponseModel.LINEAR,
) -> Optional[RecoveryPlan]:
    """Exact search for a recovery plan, or None if no partition works.

    Requests are processed in sorted order; candidate recovery sets for each
    request are enumerated from the remaining buckets in increasing
    cardinality (lexicographic within a cardinality), the final request
    absorbs all leftover buckets, and the search backtracks on failure.
    Deterministic given the code.
    """
    model = ResponseModel.parse(model)
    req = normalize_request(request, code.n)
    k = len(req)
    if k > code.m:
        raise ValueError(f"cannot partition {code.m} buckets into {k} non-empty parts")
    engine = engine_for(code)

    def recovers(subset: frozenset, i: int) -> bool:
        return engine.recovers(subset, i - 1, model)

    parts: list = []

    def search(pos: int, remaining: tuple) -> bool:
        if pos == k - 1:
            leftover = frozenset(remaining)
            if recovers(leftover, req[pos]):
                parts.append(tuple(sorted(remaining)))
                return True
            return False
        # recoverability is monotone, so an infeasible union prunes the branch
        if not recovers(frozenset(remaining), req[pos]):
            return False
        max_size = len(remaining) - (k - pos - 1)
        for size in range(1, max_size + 1):
            for cand in itertools.combinations(remaining, size):
                if recovers(frozenset(cand), req[pos]):
                    parts.append(cand)
                    rest = tuple(b for b in remaining if b not in cand)
                    if search(pos + 1, rest):
                        return True
                    parts.pop()
        return False

    if not search(0, tuple(range(code.m))):
        return None
    plan = _plan_from_parts(code, req, parts, model, engine)
    if not certify_plan(code, req, plan, model):
        raise AssertionError(f"internal: found plan failed certification for {req}")
    return plan


def _reject_empty_buckets(code: CodeSpec) -> None:
    for ell0, bucket in enumerate(code.buckets):
        if not bucket:
            raise ValueError(
                f"bucket {ell0 + 1} is empty; final codes must store something "
                "in every node"
            )


def _sweep(code, requests, model, kind, k, jobs) -> VerificationReport:
    start = time.monotonic()
    requests = list(requests)
    failures = []
    if jobs and jobs > 1:
        failures = _parallel_failures(code, requests, model, jobs)
    else:
        for req in requests:
            if find_plan(code, req, model) is None:
                failures.append((req, "no-partition"))
    failures.sort()
    return VerificationReport(
        kind=kind,
        k=k,
        model=model,
        checked=len(requests),
        failures=tuple(failures),
        elapsed_s=time.monotonic() - start,
    )


def verify_bac(
    code: CodeSpec,
    k: int,
    model: ResponseModel = ResponseModel.LINEAR,
    jobs: int = 1,
) -> VerificationReport:
    """Exhaustively check the k-batch property over all C(n+k-1, k) request
    multisets (lexicographic order)."""
    model = ResponseModel.parse(model)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > code.m:
        raise ValueError(f"k = {k} exceeds bucket count m = {code.m}")
    _reject_empty_buckets(code)
    return _sweep(code, all_batch_requests(code.n, k), model, "bac", k, jobs)


def verify_pir(
    code: CodeSpec,
    k: int,
    model: ResponseModel = ResponseModel.LINEAR,
    jobs: int = 1,
) -> VerificationReport:
    """Check the k-PIR property: only the n identical-index requests."""
    model = ResponseModel.parse(model)
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > code.m:
        raise ValueError(f"k = {k} exceeds bucket count m = {code.m}")
    _reject_empty_buckets(code)
    return _sweep(code, pir_requests(code.n, k), model, "pir", k, jobs)


def check_subset_spanning(code: CodeSpec, k: int) -> bool:
    """True iff every (m-k+1)-subset of buckets jointly spans every unit
    vector, i.e. has full joint rank n.  Any verified k-PIR code has this
    property."""
    if k > code.m:
        raise ValueError(f"k = {k} exceeds bucket count m = {code.m}")
    engine = engine_for(code)
    size = code.m - k + 1
    for subset in itertools.combinations(range(code.m), size):
        if engine.joint_rank(frozenset(subset)) < code.n:
            return False
    return True


# ---------------------------------------------------------------------------
# parallel sweep plumbing: the multiset enumeration is sharded across worker
# processes; each worker holds the immutable code and its own memo


_WORKER_CODE: Optional[CodeSpec] = None
_WORKER_MODEL: Optional[ResponseModel] = None


def _worker_init(code: CodeSpec, model_value: str) -> None:
    global _WORKER_CODE, _WORKER_MODEL
    _WORKER_CODE = code
    _WORKER_MODEL = ResponseModel(model_value)


def _worker_chunk(chunk):
    fails = []
    for req in chunk:
        if find_plan(_WORKER_CODE, req, _WORKER_MODEL) is None:
            fails.append((req, "no-partition"))
    return fails


def _parallel_failures(code, requests, model, jobs):
    import multiprocessing as mp

    n_chunks = max(1, min(len(requests), jobs * 4))
    chunks = [requests[i::n_chunks] for i in range(n_chunks)]
    ctx = mp.get_context()
    with ctx.Pool(jobs, initializer=_worker_init, initargs=(code, model.value)) as pool:
        out = pool.map(_worker_chunk, chunks)
    failures = []
    for part in out:
        failures.extend(part)
    return failures
