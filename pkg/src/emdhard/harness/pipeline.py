"""Hitting set decided through the whole reduction stack.

hitting_set_phased -> find_ov_sampling -> MOM gadget -> symmetrize -> exact
EMD -> decode.  Errors raised inside a layer are re-raised with the layer
name in front of the message and stored on ``exc.layer``.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import InconsistencyError, InvariantViolation
from ..gadgets import build_mom_gadget, decode_mom, decode_symmetrized, symmetrize
from ..matching import emd
from ..ov import FindOvConfig, HsPhaseTrace, find_ov_sampling, hitting_set_phased
from ..seeds import derive_seed
from ..vectors import PointSetPair

PIPELINE_FLOOR = 8
# fewer right copies in the MOM step keep the EMD solves near 400 points
PIPELINE_ALPHA = Fraction(1, 4)


@contextmanager
def layer(name: str):
    try:
        yield
    except (InconsistencyError, InvariantViolation) as exc:
        if getattr(exc, "layer", None):
            raise
        err = type(exc)(f"[{name}] {exc}")
        err.layer = name
        raise err from exc


@dataclass
class PipelineResult:
    trace: HsPhaseTrace
    emd_calls: int = 0
    emd_sizes: list[int] = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return self.trace.verdict

    def to_json_obj(self) -> dict:
        out = self.trace.to_json_obj()
        out["emd_calls"] = self.emd_calls
        out["emd_sizes"] = self.emd_sizes
        return out


def pipeline_hs_via_emd(
    pair: PointSetPair,
    seed: int = 0,
    alpha: Fraction = PIPELINE_ALPHA,
    brute_force_floor: int = PIPELINE_FLOOR,
    backend: str | None = None,
) -> PipelineResult:
    res = PipelineResult(trace=None)  # type: ignore[arg-type]

    def mom_solver(sub: PointSetPair):
        with layer("mom-gadget"):
            gadget = build_mom_gadget(sub)
        with layer("symmetrize"):
            sym = symmetrize(gadget.pair)
        with layer("emd"):
            _, full = emd(sym.pair, canonical=False, backend=backend)
        res.emd_calls += 1
        res.emd_sizes.append(sym.pair.n_left)
        with layer("decode-symmetrized"):
            _, m = decode_symmetrized(full, sym)
        with layer("decode-mom"):
            return decode_mom(gadget, m, sub).pi

    calls = 0

    def find_ov(sub: PointSetPair):
        nonlocal calls
        calls += 1
        cfg = FindOvConfig(alpha, derive_seed(seed, calls), brute_force_floor)
        with layer("find-ov"):
            out = find_ov_sampling(sub, cfg, mom_solver, backend)
        return out

    with layer("hitting-set"):
        res.trace = hitting_set_phased(pair, find_ov)
    return res
