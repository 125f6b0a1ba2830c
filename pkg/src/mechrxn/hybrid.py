"""Ensemble aggregation, conservation filtering, and hybrid prediction.

External predictors speak a newline-delimited JSON protocol over a child
process pipe (see AdapterClient).  Their candidate lists merge by
summing likelihoods per canonical product set; any candidate that breaks
atom or charge conservation is replaced by the next fresh prediction
from the arrow-based pipeline, so hybrid output is balanced by
construction.
"""

from __future__ import annotations

import json
import logging
import math
import subprocess
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from mechrxn.chem import canonical_key, parse_smiles, write_molset
from mechrxn.chem.mol import Molecule
from mechrxn.reaction import BalanceReport, check_balance
from mechrxn.twostep import TwoStepModels, two_step_predict

log = logging.getLogger(__name__)

# exp() clamp bounds for adapter log-likelihoods
_LOG_FLOOR = -700.0
_LOG_CEIL = 50.0


class AdapterError(RuntimeError):
    """Protocol violation, timeout, or process failure in an adapter."""


@dataclass(frozen=True)
class RankedCandidate:
    products: tuple[Molecule, ...]
    likelihood: float
    log_likelihood: float
    provenance: str
    balance: BalanceReport

    def key(self) -> str:
        return canonical_key(self.products)


def make_candidate(reactants, products, log_likelihood: float, provenance: str) -> RankedCandidate:
    clamped = min(max(log_likelihood, _LOG_FLOOR), _LOG_CEIL)
    return RankedCandidate(
        products=tuple(products),
        likelihood=math.exp(clamped),
        log_likelihood=log_likelihood,
        provenance=provenance,
        balance=check_balance(reactants, products),
    )


@dataclass
class EnsembleOutput:
    per_model: list[list[RankedCandidate]]
    merged: list[RankedCandidate]


def ensemble_merge(model_outputs: list[list[RankedCandidate]]) -> list[RankedCandidate]:
    """Group candidates by canonical product set and sum their likelihoods.

    Output is sorted by summed likelihood, ties broken on canonical text;
    the result does not depend on model order.
    """
    if not model_outputs:
        raise ValueError("need at least one model output")
    groups: dict[str, list[RankedCandidate]] = {}
    for output in model_outputs:
        for candidate in output:
            groups.setdefault(candidate.key(), []).append(candidate)
    merged = []
    for key, members in groups.items():
        total = sum(c.likelihood for c in members)
        representative = members[0]
        merged.append(
            RankedCandidate(
                products=representative.products,
                likelihood=total,
                log_likelihood=math.log(total) if total > 0 else _LOG_FLOOR,
                provenance=representative.provenance,
                balance=representative.balance,
            )
        )
    merged.sort(key=lambda c: (-c.likelihood, c.key()))
    return merged


def alchemy_filter(
    reactants,
    candidates: list[RankedCandidate],
    fallbacks,
) -> list[RankedCandidate]:
    """Replace conservation-breaking candidates with arrow-based ones.

    Walks down the fallback list for each bad slot, skipping product sets
    already present; when fallbacks run dry the slot is dropped and the
    list compacts.  Every surviving candidate is balanced.
    """
    fallback_list = list(fallbacks)
    present = {c.key() for c in candidates if c.balance.balanced}
    fallback_iter = iter(fallback_list)
    out: list[RankedCandidate] = []
    for candidate in candidates:
        if candidate.balance.balanced:
            out.append(candidate)
            continue
        replacement = None
        for fb in fallback_iter:
            products = fb.step.products
            if fb.step.balance is not None and not fb.step.balance.balanced:
                continue
            key = canonical_key(products)
            if key in present:
                continue
            replacement = make_candidate(
                reactants,
                products,
                fb.score if fb.score is not None else _LOG_FLOOR,
                "twostep",
            )
            present.add(key)
            break
        if replacement is not None:
            out.append(replacement)
    return out


# ---------------------------------------------------------------------------
# predictor protocol


class InProcessPredictor:
    """Test/mock predictor: wraps a callable returning candidate tuples."""

    def __init__(self, fn, name: str = "mock"):
        self.fn = fn
        self.name = name

    def predict(self, reactants, top_k: int):
        return self.fn(reactants, top_k)

    def close(self):
        pass


class AdapterClient:
    """Child-process predictor speaking newline-delimited JSON.

    handshake: {"hello": {"name": ..., "version": ...}}
    request:   {"id": n, "reactants": smiles, "top_k": k}
    response:  {"id": n, "candidates": [{"products": smiles,
                                          "log_likelihood": x}, ...]}
    """

    def __init__(self, argv: list[str], deadline: float = 30.0, name: str | None = None):
        self.argv = argv
        self.deadline = deadline
        self.name = name or argv[0]
        self._proc: subprocess.Popen | None = None
        self._lock = threading.Lock()
        self._next_id = 0

    def start(self) -> None:
        self._proc = subprocess.Popen(
            self.argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        hello = self._read_line()
        try:
            payload = json.loads(hello)
            self.name = payload["hello"]["name"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise AdapterError(f"bad handshake from {self.argv}: {hello!r}") from exc

    def _read_line(self) -> str:
        box: list[str] = []

        def reader():
            box.append(self._proc.stdout.readline())

        t = threading.Thread(target=reader, daemon=True)
        t.start()
        t.join(self.deadline)
        if t.is_alive() or not box or not box[0]:
            raise AdapterError(f"adapter {self.name}: timeout or closed stream")
        return box[0]

    def predict(self, reactants, top_k: int):
        if self._proc is None:
            self.start()
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            request = {
                "id": request_id,
                "reactants": write_molset(reactants),
                "top_k": top_k,
            }
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
            raw = self._read_line()
        try:
            response = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"adapter {self.name}: bad JSON {raw!r}") from exc
        if response.get("id") != request_id:
            raise AdapterError(
                f"adapter {self.name}: id mismatch "
                f"(sent {request_id}, got {response.get('id')})"
            )
        if "error" in response:
            raise AdapterError(f"adapter {self.name}: {response['error']}")
        out = []
        for entry in response.get("candidates", []):
            products = parse_smiles(entry["products"])
            out.append((products, float(entry["log_likelihood"])))
        return out

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except Exception:
                self._proc.kill()
            self._proc = None


def _call_predictor(predictor, reactants, top_k, index):
    raw = predictor.predict(reactants, top_k)
    tag = f"external:{index}"
    return [
        make_candidate(reactants, products, loglik, tag)
        for products, loglik in raw
    ]


def hybrid_predict(
    reactants,
    k: int,
    predictors,
    models: TwoStepModels,
    per_model_k: int | None = None,
    k_sites: int = 6,
) -> list[RankedCandidate]:
    """Adapter fan-out, likelihood merge, conservation filter, truncate.

    Individual predictor failures are logged and tolerated; the call
    fails only when every predictor fails.
    """
    per_model_k = per_model_k or max(k, 10)
    outputs: list[list[RankedCandidate]] = []
    failures: list[str] = []
    with ThreadPoolExecutor(max_workers=max(1, len(predictors))) as pool:
        futures = [
            pool.submit(_call_predictor, p, reactants, per_model_k, i)
            for i, p in enumerate(predictors)
        ]
        for i, future in enumerate(futures):
            try:
                outputs.append(future.result())
            except Exception as exc:
                failures.append(f"predictor {i}: {exc}")
                log.warning("predictor %d failed: %s", i, exc)
    if not outputs:
        raise AdapterError("all predictors failed: " + "; ".join(failures))
    merged = ensemble_merge(outputs)
    fallbacks = two_step_predict(
        reactants, models, k_sites=k_sites, k_out=max(2 * k, 20)
    )
    return alchemy_filter(reactants, merged, fallbacks)[:k]
